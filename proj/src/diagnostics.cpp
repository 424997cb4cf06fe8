#include "sawsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "blas.hpp"
#include "parallel.hpp"
#include "sawsim/kernels.hpp"
#include "sawsim/sawtooth.hpp"

namespace sawsim::diag {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Eigen::MatrixXd overlap_matrix(const floquet::FloquetSpectrum& spec0,
                               const floquet::FloquetSpectrum& spec_eps) {
  if (spec0.dim() != spec_eps.dim())
    throw contract_error("overlap_matrix: dimension mismatch");
  return detail::adjoint_product(spec_eps.eigenvectors, spec0.eigenvectors)
      .cwiseAbs2();
}

double eigenstate_entropy(std::span<const double> row) {
  double sum = 0.0;
  for (double p : row) {
    if (p < -1e-12)
      throw contract_error("eigenstate_entropy: negative overlap weight");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw contract_error("eigenstate_entropy: row does not sum to 1");
  double s = 0.0;
  for (double p : row)
    if (p > 0.0) s -= p * std::log2(p);
  const double n_q = std::log2(static_cast<double>(row.size()));
  return std::clamp(s, 0.0, n_q);
}

double mean_entropy(const Eigen::MatrixXd& overlaps) {
  double acc = 0.0;
  for (Eigen::Index a = 0; a < overlaps.rows(); ++a) {
    std::vector<double> row(overlaps.cols());
    for (Eigen::Index b = 0; b < overlaps.cols(); ++b) row[b] = overlaps(a, b);
    acc += eigenstate_entropy(row);
  }
  return acc / static_cast<double>(overlaps.rows());
}

imperfect::ImperfectionSpec DisorderModel::spec_at(double epsilon, int n_q,
                                                   int realization_index) const {
  const double delta = epsilon / tau_g;
  if (single_impurity) {
    const int qubit =
        impurity_qubit >= 0 ? impurity_qubit : realization_index % n_q;
    return imperfect::ImperfectionSpec::single_impurity(qubit, delta, tau_g);
  }
  return imperfect::ImperfectionSpec::static_chain(delta, j_ratio * delta,
                                                   tau_g);
}

EntropyScan entropy_scan(const MapParams& params, const DisorderModel& model,
                         const std::vector<double>& eps_grid,
                         int n_realizations, const SeedPlan& plan, int jobs,
                         const floquet::FloquetSpectrum* reference,
                         std::uint64_t eps_index_offset) {
  if (eps_grid.empty()) throw contract_error("entropy_scan: empty grid");
  if (n_realizations < 1)
    throw contract_error("entropy_scan: need at least one realization");

  floquet::FloquetSpectrum local_ref;
  bool need_reference = false;
  for (double e : eps_grid)
    if (e > 0.0) need_reference = true;
  if (need_reference && !reference) {
    local_ref = floquet::eigendecompose(
        floquet::build_floquet_matrix(params, std::nullopt, std::nullopt,
                                      floquet::kDefaultMaxDim, jobs));
    reference = &local_ref;
  }

  struct TaskResult {
    double s = 0.0;
    bool ok = false;
    std::string err;
    std::uint64_t seed = 0;
  };
  const std::size_t n_eps = eps_grid.size();
  const std::size_t n_real = static_cast<std::size_t>(n_realizations);
  std::vector<TaskResult> results(n_eps * n_real);
  std::vector<std::size_t> tasks;
  for (std::size_t e = 0; e < n_eps; ++e) {
    if (eps_grid[e] == 0.0) continue;  // exact: identity overlap, S = 0
    for (std::size_t r = 0; r < n_real; ++r) tasks.push_back(e * n_real + r);
  }

  detail::parallel_for(tasks.size(), jobs, [&](std::size_t ti) {
    const std::size_t flat = tasks[ti];
    const std::size_t e = flat / n_real;
    const std::size_t r = flat % n_real;
    TaskResult& out = results[flat];
    out.seed = plan.task_seed(static_cast<std::uint64_t>(params.n_q),
                              e + eps_index_offset, r);
    try {
      const auto spec =
          model.spec_at(eps_grid[e], params.n_q, static_cast<int>(r));
      const auto real =
          imperfect::sample_realization(spec, params.n_q, out.seed);
      const Eigen::MatrixXcd u = floquet::build_floquet_matrix(
          params, spec, real, floquet::kDefaultMaxDim, 1);
      const auto perturbed = floquet::eigendecompose(u);
      out.s = mean_entropy(overlap_matrix(*reference, perturbed));
      out.ok = true;
    } catch (const std::exception& ex) {
      out.err = ex.what();
    }
  });

  EntropyScan scan;
  scan.reserve(n_eps);
  for (std::size_t e = 0; e < n_eps; ++e) {
    EntropyPoint pt;
    pt.epsilon = eps_grid[e];
    pt.n_q = params.n_q;
    pt.model = model.tag();
    if (eps_grid[e] == 0.0) {
      pt.mean_s = 0.0;
      pt.n_realizations = n_realizations;
      scan.push_back(std::move(pt));
      continue;
    }
    std::vector<double> values;
    for (std::size_t r = 0; r < n_real; ++r) {
      const TaskResult& tr = results[e * n_real + r];
      pt.seeds.push_back(tr.seed);
      if (tr.ok)
        values.push_back(tr.s);
      else if (pt.error.empty())
        pt.error = tr.err;
    }
    pt.n_realizations = static_cast<int>(values.size());
    if (values.empty()) {
      pt.ok = false;
      scan.push_back(std::move(pt));
      continue;
    }
    if (!pt.error.empty()) pt.ok = false;  // partial point, flagged
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    pt.mean_s = mean;
    pt.stderr_s =
        values.size() > 1
            ? std::sqrt(var / (static_cast<double>(values.size()) *
                               (static_cast<double>(values.size()) - 1.0)))
            : 0.0;
    scan.push_back(std::move(pt));
  }
  return scan;
}

Threshold find_threshold(const EntropyScan& scan) {
  std::vector<const EntropyPoint*> pts;
  for (const auto& p : scan)
    if (p.ok) pts.push_back(&p);
  std::sort(pts.begin(), pts.end(),
            [](const EntropyPoint* a, const EntropyPoint* b) {
              return a->epsilon < b->epsilon;
            });
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto& lo = *pts[i];
    const auto& hi = *pts[i + 1];
    const bool brackets = (lo.mean_s - 1.0) * (hi.mean_s - 1.0) <= 0.0;
    if (!brackets || lo.epsilon <= 0.0) continue;
    Threshold th;
    th.eps_lo = lo.epsilon;
    th.eps_hi = hi.epsilon;
    th.s_lo = lo.mean_s;
    th.s_hi = hi.mean_s;
    if (hi.mean_s == lo.mean_s) {
      th.eps_chi = lo.epsilon;
      return th;
    }
    const double t = (1.0 - lo.mean_s) / (hi.mean_s - lo.mean_s);
    th.eps_chi = std::exp(std::log(lo.epsilon) +
                          t * (std::log(hi.epsilon) - std::log(lo.epsilon)));
    return th;
  }
  throw notfound_error(
      "no pair of scan points brackets S = 1; extend the epsilon grid");
}

std::string InitState::tag() const {
  return (kind == Kind::floquet_eigenstate ? "eig:" : "mom:") +
         std::to_string(index);
}

InitState InitState::parse(const std::string& text) {
  InitState init;
  if (text.rfind("eig:", 0) == 0) {
    init.kind = Kind::floquet_eigenstate;
    init.index = std::stol(text.substr(4));
  } else if (text.rfind("mom:", 0) == 0) {
    init.kind = Kind::momentum;
    init.index = std::stol(text.substr(4));
  } else {
    throw domain_error("init must be eig:IDX or mom:N, got '" + text + "'");
  }
  return init;
}

FidelitySeries fidelity_series(
    const MapParams& params,
    const std::optional<imperfect::ImperfectionSpec>& spec,
    const std::optional<imperfect::DisorderRealization>& real,
    const InitState& init, int t_max,
    const floquet::FloquetSpectrum* reference) {
  if (t_max < 0) throw domain_error("t_max must be >= 0");
  StateVector psi0;
  if (init.kind == InitState::Kind::momentum) {
    psi0 = basis_state(params, init.index);
  } else {
    floquet::FloquetSpectrum local;
    if (!reference) {
      local = floquet::eigendecompose(floquet::build_floquet_matrix(params));
      reference = &local;
    }
    if (init.index < 0 || init.index >= reference->dim())
      throw domain_error("eigenstate index out of range");
    psi0.amps.assign(reference->eigenvectors.col(init.index).data(),
                     reference->eigenvectors.col(init.index).data() +
                         reference->dim());
    psi0.basis = Basis::momentum;
  }

  StateVector psi_eps = psi0;
  const sawtooth::IdealKick ideal(params);
  const sawtooth::CircuitKick circuit(params, spec, real);

  FidelitySeries series;
  series.init_tag = init.tag();
  series.f.resize(static_cast<std::size_t>(t_max) + 1);
  series.f[0] = 1.0;  // identical initial states by construction
  for (int t = 1; t <= t_max; ++t) {
    ideal.apply(psi0);
    circuit.apply(psi_eps);
    series.f[static_cast<std::size_t>(t)] =
        std::norm(inner_product(psi0, psi_eps));
  }
  return series;
}

ExpFit fit_exponential_decay(const FidelitySeries& series,
                             double predicted_floor) {
  ExpFit fit;
  const auto& f = series.f;
  const int n = static_cast<int>(f.size());
  const double cut = std::max(2.0 * predicted_floor, 1e-14);
  int t_lo = 3;
  int t_hi = n;
  for (int t = t_lo; t < n; ++t) {
    if (f[t] < cut) {
      t_hi = t;
      break;
    }
  }
  // tail mean as the observed floor, whether or not the fit is usable
  const int tail = std::max(5, n / 10);
  double tail_sum = 0.0;
  int tail_count = 0;
  for (int t = std::max(0, n - tail); t < n; ++t, ++tail_count)
    tail_sum += f[t];
  fit.floor_est = tail_count ? tail_sum / tail_count : 0.0;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  if (t_hi - t_lo < 5) return fit;
  if (!(f[t_lo] > 0.0) || !(f[t_hi - 1] > 0.0)) return fit;
  if (f[t_hi - 1] > 0.5 * f[t_lo]) return fit;  // not enough decay to fit

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int t = t_lo; t < t_hi; ++t) {
    if (!(f[t] > 0.0)) continue;
    const double x = t, y = std::log(f[t]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  const double denom = m * sxx - sx * sx;
  if (m < 5 || denom == 0.0) return fit;
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  if (slope >= 0.0) return fit;
  fit.rate = -slope;
  fit.t_f = 1.0 / fit.rate;
  double sse = 0.0;
  for (int t = t_lo; t < t_hi; ++t) {
    if (!(f[t] > 0.0)) continue;
    const double r = std::log(f[t]) - (intercept + slope * t);
    sse += r * r;
  }
  fit.sse = sse;
  fit.valid = true;
  return fit;
}

DecayShape compare_decay_shapes(const FidelitySeries& series) {
  DecayShape shape;
  const auto& f = series.f;
  double st2 = 0, st4 = 0, sty = 0, st2y = 0;
  std::vector<std::pair<double, double>> pts;
  for (int t = 1; t < static_cast<int>(f.size()) && t <= 400; ++t) {
    if (f[t] < 0.2) break;
    const double y = -std::log(std::max(f[t], 1e-300));
    pts.emplace_back(t, y);
  }
  shape.n_points = static_cast<int>(pts.size());
  if (pts.size() < 3) return shape;
  for (const auto& [t, y] : pts) {
    st2 += t * t;
    st4 += t * t * t * t;
    sty += t * y;
    st2y += t * t * y;
  }
  shape.c_linear = sty / st2;
  shape.c_quadratic = st2y / st4;
  for (const auto& [t, y] : pts) {
    const double rl = y - shape.c_linear * t;
    const double rq = y - shape.c_quadratic * t * t;
    shape.sse_linear += rl * rl;
    shape.sse_quadratic += rq * rq;
  }
  shape.gaussian_preferred = shape.sse_quadratic < shape.sse_linear;
  return shape;
}

double HusimiGrid::theta_center(int it) const {
  return (it + 0.5) * kTwoPi / n_theta;
}
double HusimiGrid::p_center(int ip) const {
  return -std::numbers::pi + (ip + 0.5) * kTwoPi / n_p;
}
double HusimiGrid::cell_area() const {
  return (kTwoPi / n_theta) * (kTwoPi / n_p);
}
double HusimiGrid::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * cell_area();
}

HusimiGrid husimi(const StateVector& state, const MapParams& params,
                  int n_theta, int n_p, double s) {
  if (s <= 0.0) throw domain_error("husimi: uncertainty ratio s must be > 0");
  if (n_theta < 2 || n_p < 2) throw domain_error("husimi: grid too small");
  if (state.basis != Basis::momentum)
    throw contract_error("husimi: state must be in the momentum basis");
  if (state.dim() != params.big_n)
    throw contract_error("husimi: dimension mismatch");

  const std::size_t n = params.big_n;
  const double t_kick = params.t_kick;
  const double four_dp2 = 2.0 * s * t_kick;  // 4 Dp^2 with Dp^2 = s T / 2
  constexpr int kImages = 3;

  HusimiGrid grid;
  grid.n_theta = n_theta;
  grid.n_p = n_p;
  grid.s = s;
  grid.t_kick = t_kick;
  grid.values.assign(static_cast<std::size_t>(n_theta) * n_p, 0.0);

  // phase tables per theta column: conj table so the kernel dot gives
  // sum_j e^{+i n_j theta0} w_j psi_j
  std::vector<std::vector<cplx>> phase_conj(n_theta, std::vector<cplx>(n));
  for (int it = 0; it < n_theta; ++it) {
    const double theta0 = grid.theta_center(it);
    for (std::size_t j = 0; j < n; ++j) {
      const double mom = static_cast<double>(params.momentum_of_index(j));
      phase_conj[it][j] = std::polar(1.0, -mom * theta0);
    }
  }

  struct Extra {
    std::size_t j;
    int m;
    cplx g_psi;  // g_m(j) * psi_j
    double g2;
  };

  std::vector<cplx> wpsi(n);
  for (int ip = 0; ip < n_p; ++ip) {
    const double p0 = grid.p_center(ip);
    double norm2 = 0.0;
    std::vector<Extra> extras;
    for (std::size_t j = 0; j < n; ++j) {
      const double mom = static_cast<double>(params.momentum_of_index(j));
      const double d0 = t_kick * mom - p0;
      const double g0 = std::exp(-d0 * d0 / four_dp2);
      wpsi[j] = g0 * state.amps[j];
      norm2 += g0 * g0;
      for (int m = -kImages; m <= kImages; ++m) {
        if (m == 0) continue;
        const double d = d0 + kTwoPi * m;
        const double g = std::exp(-d * d / four_dp2);
        if (g < 1e-14) continue;
        extras.push_back({j, m, g * state.amps[j], g * g});
        norm2 += g * g;
      }
    }
    if (norm2 <= 0.0) continue;
    for (int it = 0; it < n_theta; ++it) {
      cplx dot = kernels::dot_conjugated(phase_conj[it].data(), wpsi.data(), n);
      if (!extras.empty()) {
        const double theta0 = grid.theta_center(it);
        // wrapped images carry e^{-i m N theta0}; conjugated here
        for (const auto& ex : extras) {
          const cplx zbar_m = std::polar(
              1.0, static_cast<double>(ex.m) * static_cast<double>(n) * theta0);
          const cplx tau = std::conj(phase_conj[it][ex.j]);
          dot += tau * zbar_m * ex.g_psi;
        }
      }
      grid.values[static_cast<std::size_t>(ip) * n_theta + it] =
          std::norm(dot) / norm2;
    }
  }
  return grid;
}

double husimi_symmetry_deviation(const HusimiGrid& grid) {
  double num = 0.0, den = 0.0;
  for (int ip = 0; ip < grid.n_p; ++ip) {
    for (int it = 0; it < grid.n_theta; ++it) {
      const double a = grid.value(ip, it);
      const double b = grid.value(grid.n_p - 1 - ip, grid.n_theta - 1 - it);
      num += std::abs(a - b);
      den += a + b;
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

namespace {

double wrap_diff(double a, double b) {
  double d = a - b;
  while (d > std::numbers::pi) d -= kTwoPi;
  while (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

double lorentz_sse(const Eigen::VectorXd& weights,
                   const Eigen::VectorXd& phases, double center,
                   double gamma) {
  const Eigen::Index n = weights.size();
  double norm = 0.0;
  std::vector<double> q(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = wrap_diff(phases[i], center);
    q[i] = 1.0 / (d * d + gamma * gamma / 4.0);
    norm += q[i];
  }
  double sse = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = weights[i] - q[i] / norm;
    sse += r * r;
  }
  return sse;
}

}  // namespace

Ldos ldos(const Eigen::VectorXcd& phi_eps,
          const floquet::FloquetSpectrum& spec0) {
  if (phi_eps.size() != spec0.dim())
    throw contract_error("ldos: dimension mismatch");
  Ldos out;
  const Eigen::Index n = spec0.dim();
  out.weights = (spec0.eigenvectors.adjoint() * phi_eps).cwiseAbs2();
  Eigen::Index arg_max = 0;
  const double w_max = out.weights.maxCoeff(&arg_max);
  out.center = spec0.eigenphases[arg_max];
  if (w_max > 0.99) {
    out.perturbative = true;
    out.gamma = 0.0;
    return out;
  }

  const double delta_e = kTwoPi / static_cast<double>(n);
  const double ipr = out.weights.squaredNorm();
  double gamma0 = std::max(delta_e / (std::numbers::pi * ipr), delta_e / 10.0);

  // coarse grid, then Nelder-Mead on (center, ln gamma)
  double best_c = out.center, best_g = gamma0;
  double best = lorentz_sse(out.weights, spec0.eigenphases, best_c, best_g);
  for (double gf : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    for (int dc = -2; dc <= 2; ++dc) {
      const double c = out.center + dc * delta_e;
      const double g = gamma0 * gf;
      const double sse = lorentz_sse(out.weights, spec0.eigenphases, c, g);
      if (sse < best) {
        best = sse;
        best_c = c;
        best_g = g;
      }
    }
  }

  struct Vertex {
    double c, lg, sse;
  };
  auto eval = [&](double c, double lg) {
    return Vertex{c, lg,
                  lorentz_sse(out.weights, spec0.eigenphases, c, std::exp(lg))};
  };
  Vertex v0 = eval(best_c, std::log(best_g));
  Vertex v1 = eval(best_c + delta_e, std::log(best_g));
  Vertex v2 = eval(best_c, std::log(best_g) + std::log(2.0));
  auto order = [&] {
    if (v0.sse > v1.sse) std::swap(v0, v1);
    if (v1.sse > v2.sse) std::swap(v1, v2);
    if (v0.sse > v1.sse) std::swap(v0, v1);
  };
  for (int iter = 0; iter < 200; ++iter) {
    order();
    const double cc = (v0.c + v1.c) / 2.0;
    const double cl = (v0.lg + v1.lg) / 2.0;
    Vertex refl = eval(cc + (cc - v2.c), cl + (cl - v2.lg));
    if (refl.sse < v0.sse) {
      Vertex exp_v = eval(cc + 2.0 * (cc - v2.c), cl + 2.0 * (cl - v2.lg));
      v2 = exp_v.sse < refl.sse ? exp_v : refl;
    } else if (refl.sse < v1.sse) {
      v2 = refl;
    } else {
      Vertex contr = eval(cc + 0.5 * (v2.c - cc), cl + 0.5 * (v2.lg - cl));
      if (contr.sse < v2.sse) {
        v2 = contr;
      } else {
        v1 = eval(v0.c + 0.5 * (v1.c - v0.c), v0.lg + 0.5 * (v1.lg - v0.lg));
        v2 = eval(v0.c + 0.5 * (v2.c - v0.c), v0.lg + 0.5 * (v2.lg - v0.lg));
      }
    }
  }
  order();
  out.center = wrap_diff(v0.c, 0.0);
  out.gamma = std::exp(v0.lg);
  out.sse = v0.sse;
  return out;
}

double predict(Formula formula, double epsilon, int n_q,
               TheoryConstants constants) {
  if (epsilon <= 0.0) throw domain_error("predict: epsilon must be positive");
  if (n_q < 2) throw domain_error("predict: n_q must be >= 2");
  const double big_n = std::ldexp(1.0, n_q);
  const double nq5 = std::pow(static_cast<double>(n_q), 5.0);
  switch (formula) {
    case Formula::entropy_single:
      return std::log2(constants.a * epsilon * epsilon * big_n);
    case Formula::entropy_static:
      return std::log2(constants.b * epsilon * epsilon * nq5 * big_n);
    case Formula::threshold_single:
      return 1.0 / std::sqrt(constants.a * big_n);
    case Formula::threshold_static:
      return 1.0 / std::sqrt(constants.b * big_n * nq5);
    case Formula::gamma_single:
      return epsilon * epsilon;
    case Formula::gamma_static:
      return epsilon * epsilon * nq5;
    case Formula::tau_chi_single:
      return 1.0 / (epsilon * epsilon);
    case Formula::tau_chi_static:
      return 1.0 / (epsilon * epsilon * nq5);
  }
  throw domain_error("predict: unknown formula");
}

}  // namespace sawsim::diag
