#include "sawsim/floquet.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "blas.hpp"
#include "parallel.hpp"
#include "sawsim/sawtooth.hpp"

namespace sawsim::floquet {

namespace {

constexpr double kResidualTol = 1e-8;
constexpr double kInputDefectTol = 1e-6;

double wrap_phase(double lambda) {
  // into (-pi, pi]
  if (lambda <= -std::numbers::pi) lambda += 2.0 * std::numbers::pi;
  return lambda;
}

}  // namespace

Eigen::MatrixXcd build_floquet_matrix(
    const MapParams& params,
    const std::optional<imperfect::ImperfectionSpec>& spec,
    const std::optional<imperfect::DisorderRealization>& real,
    std::size_t max_dim, int jobs) {
  const std::size_t n = params.big_n;
  if (n > max_dim)
    throw resource_error(
        "Floquet matrix dimension " + std::to_string(n) + " exceeds the " +
        std::to_string(max_dim) +
        " limit; raise max_dim only with enough memory for a dense complex "
        "matrix of that size");
  const sawtooth::CircuitKick kick(params, spec, real);
  Eigen::MatrixXcd u(n, n);
  detail::parallel_for(n, jobs, [&](std::size_t j) {
    StateVector col;
    col.amps.assign(n, cplx(0.0, 0.0));
    col.amps[j] = cplx(1.0, 0.0);
    col.basis = Basis::momentum;
    kick.apply(col);
    std::copy(col.amps.begin(), col.amps.end(), u.col(j).data());
  });
  return u;
}

double unitarity_defect(const Eigen::MatrixXcd& u) {
  Eigen::MatrixXcd g = detail::adjoint_product(u, u);
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff();
}

FloquetSpectrum eigendecompose(const Eigen::MatrixXcd& u) {
  const auto n = u.rows();
  if (n != u.cols()) throw contract_error("eigendecompose: matrix not square");
  {
    const double defect = unitarity_defect(u);
    if (defect > kInputDefectTol)
      throw contract_error("eigendecompose: input unitarity defect " +
                           std::to_string(defect) + " exceeds 1e-6");
  }
  detail::pin_blas_threads();
  Eigen::MatrixXcd t = u;
  Eigen::MatrixXcd q(n, n);
  Eigen::VectorXcd w(n);
  lapack_int sdim = 0;
  const lapack_int info = LAPACKE_zgees(
      LAPACK_COL_MAJOR, 'V', 'N', nullptr, static_cast<lapack_int>(n),
      reinterpret_cast<lapack_complex_double*>(t.data()),
      static_cast<lapack_int>(n), &sdim,
      reinterpret_cast<lapack_complex_double*>(w.data()),
      reinterpret_cast<lapack_complex_double*>(q.data()),
      static_cast<lapack_int>(n));
  if (info != 0)
    throw diagnostics_error("zgees failed with info " + std::to_string(info),
                            0.0);

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd phases(n);
  for (Eigen::Index i = 0; i < n; ++i) phases[i] = wrap_phase(std::arg(w[i]));
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return phases[a] < phases[b];
  });

  FloquetSpectrum spec;
  spec.eigenphases.resize(n);
  spec.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    spec.eigenphases[i] = phases[order[i]];
    spec.eigenvectors.col(i) = q.col(order[i]);
    // gauge: largest-magnitude component real positive
    Eigen::Index arg_max = 0;
    spec.eigenvectors.col(i).cwiseAbs().maxCoeff(&arg_max);
    const cplx pivot = spec.eigenvectors(arg_max, i);
    if (std::abs(pivot) > 0.0)
      spec.eigenvectors.col(i) *= std::conj(pivot) / std::abs(pivot);
  }

  const Eigen::MatrixXcd r = detail::product(u, spec.eigenvectors);
  double max_res = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx lam = std::polar(1.0, spec.eigenphases[i]);
    max_res = std::max(max_res,
                       (r.col(i) - lam * spec.eigenvectors.col(i)).norm());
  }
  spec.max_residual = max_res;
  {
    Eigen::MatrixXcd g =
        detail::adjoint_product(spec.eigenvectors, spec.eigenvectors);
    g.diagonal().array() -= 1.0;
    spec.ortho_defect = g.cwiseAbs().maxCoeff();
  }
  if (spec.max_residual > kResidualTol)
    throw diagnostics_error("eigendecomposition residual " +
                                std::to_string(spec.max_residual) +
                                " exceeds 1e-8",
                            spec.max_residual);
  if (spec.ortho_defect > kResidualTol)
    throw diagnostics_error("eigenvector orthonormality defect " +
                                std::to_string(spec.ortho_defect) +
                                " exceeds 1e-8",
                            spec.ortho_defect);
  return spec;
}

namespace {

// Kick operator for one grid epsilon; the frozen unit realization is scaled,
// the single-impurity strength is set directly.
sawtooth::CircuitKick kick_at_epsilon(
    const MapParams& params, const imperfect::ImperfectionSpec& tmpl,
    const imperfect::DisorderRealization& unit_real, double eps) {
  if (eps == 0.0) return sawtooth::CircuitKick(params);
  if (const auto* imp = std::get_if<imperfect::SingleImpurity>(&tmpl.variant)) {
    auto spec = imperfect::ImperfectionSpec::single_impurity(
        imp->qubit, eps / tmpl.tau_g, tmpl.tau_g);
    return sawtooth::CircuitKick(
        params, spec,
        imperfect::sample_realization(spec, params.n_q, unit_real.seed));
  }
  auto spec = imperfect::ImperfectionSpec::static_chain(
      eps / tmpl.tau_g,
      std::get<imperfect::StaticChain>(tmpl.variant).j_coupling *
          (eps / tmpl.tau_g),
      tmpl.tau_g);
  return sawtooth::CircuitKick(params, spec,
                               unit_real.scaled(eps / tmpl.tau_g));
}

}  // namespace

SpectralSweep sweep_spectrum(const MapParams& params,
                             const imperfect::ImperfectionSpec& spec_template,
                             const imperfect::DisorderRealization& unit_real,
                             const std::vector<double>& eps_grid, int jobs,
                             const SweepObserver& observer) {
  if (eps_grid.empty()) throw contract_error("sweep_spectrum: empty grid");
  if (!std::is_sorted(eps_grid.begin(), eps_grid.end()))
    throw contract_error("sweep_spectrum: grid must be ascending");

  const std::size_t steps = eps_grid.size();
  const Eigen::Index n = static_cast<Eigen::Index>(params.big_n);
  if (params.big_n > kDefaultMaxDim)
    throw resource_error("sweep dimension exceeds the configured limit");
  std::vector<FloquetSpectrum> spectra(steps);
  detail::parallel_for(steps, jobs, [&](std::size_t s) {
    const auto kick =
        kick_at_epsilon(params, spec_template, unit_real, eps_grid[s]);
    Eigen::MatrixXcd u(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      StateVector col;
      col.amps.assign(params.big_n, cplx(0.0, 0.0));
      col.amps[static_cast<std::size_t>(j)] = cplx(1.0, 0.0);
      kick.apply(col);
      std::copy(col.amps.begin(), col.amps.end(), u.col(j).data());
    }
    spectra[s] = eigendecompose(u);
  });

  SpectralSweep sweep;
  sweep.epsilons = eps_grid;
  sweep.eigenphases.resize(steps, n);
  sweep.overlaps.resize(steps, n);
  sweep.flagged.assign(steps, std::vector<bool>(n, false));

  std::vector<int> branch_col(n);
  std::iota(branch_col.begin(), branch_col.end(), 0);
  for (Eigen::Index b = 0; b < n; ++b) {
    sweep.eigenphases(0, b) = spectra[0].eigenphases[b];
    sweep.overlaps(0, b) = 1.0;
  }
  if (observer) observer(0, spectra[0], branch_col);

  for (std::size_t s = 1; s < steps; ++s) {
    const Eigen::MatrixXd mag =
        detail::adjoint_product(spectra[s - 1].eigenvectors,
                                spectra[s].eigenvectors)
            .cwiseAbs();
    // greedy maximal-overlap assignment: near-identity permutation except
    // around avoided crossings
    struct Entry {
      double mag;
      int row, col;
    };
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        entries.push_back({mag(r, c), r, c});
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.mag > b.mag; });
    std::vector<int> row_to_col(n, -1);
    std::vector<char> col_used(n, 0);
    Eigen::Index assigned = 0;
    for (const auto& e : entries) {
      if (assigned == n) break;
      if (row_to_col[e.row] >= 0 || col_used[e.col]) continue;
      row_to_col[e.row] = e.col;
      col_used[e.col] = 1;
      ++assigned;
    }
    std::vector<int> next_branch_col(n);
    for (Eigen::Index b = 0; b < n; ++b) {
      const int prev = branch_col[b];
      const int col = row_to_col[prev];
      next_branch_col[b] = col;
      const double ov = mag(prev, col);
      sweep.eigenphases(s, b) = spectra[s].eigenphases[col];
      sweep.overlaps(s, b) = ov;
      sweep.flagged[s][b] = ov < 0.5;
    }
    branch_col = std::move(next_branch_col);
    if (observer) observer(s, spectra[s], branch_col);
  }
  return sweep;
}

std::pair<std::vector<double>, std::vector<double>> parity_sector_eigenphases(
    const MapParams& params, int jobs) {
  const std::size_t n = params.big_n;
  const Eigen::MatrixXcd u =
      build_floquet_matrix(params, std::nullopt, std::nullopt, kDefaultMaxDim,
                           jobs);
  const double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
  const std::size_t pairs = n / 2 - 1;
  const std::size_t dim_e = n / 2 + 1;
  const std::size_t dim_o = n / 2 - 1;

  // even basis columns: e_0, e_{N/2}, (e_j + e_{N-j})/sqrt2
  // odd  basis columns: (e_j - e_{N-j})/sqrt2
  auto project = [&](bool even) {
    const std::size_t dim = even ? dim_e : dim_o;
    Eigen::MatrixXcd w(n, dim);
    std::size_t c = 0;
    if (even) {
      w.col(c++) = u.col(0);
      w.col(c++) = u.col(n / 2);
    }
    for (std::size_t j = 1; j <= pairs; ++j) {
      if (even)
        w.col(c++) = (u.col(j) + u.col(n - j)) * inv_sqrt2;
      else
        w.col(c++) = (u.col(j) - u.col(n - j)) * inv_sqrt2;
    }
    Eigen::MatrixXcd sector(dim, dim);
    c = 0;
    if (even) {
      sector.row(c++) = w.row(0);
      sector.row(c++) = w.row(n / 2);
    }
    for (std::size_t j = 1; j <= pairs; ++j) {
      if (even)
        sector.row(c++) = (w.row(j) + w.row(n - j)) * inv_sqrt2;
      else
        sector.row(c++) = (w.row(j) - w.row(n - j)) * inv_sqrt2;
    }
    return sector;
  };

  auto phases_of = [](Eigen::MatrixXcd m) {
    const auto dim = m.rows();
    Eigen::VectorXcd w(dim);
    detail::pin_blas_threads();
    lapack_int sdim = 0;
    const lapack_int info = LAPACKE_zgees(
        LAPACK_COL_MAJOR, 'N', 'N', nullptr, static_cast<lapack_int>(dim),
        reinterpret_cast<lapack_complex_double*>(m.data()),
        static_cast<lapack_int>(dim), &sdim,
        reinterpret_cast<lapack_complex_double*>(w.data()), nullptr,
        static_cast<lapack_int>(dim));
    if (info != 0)
      throw diagnostics_error("sector zgees failed", 0.0);
    std::vector<double> phases(dim);
    for (Eigen::Index i = 0; i < dim; ++i) phases[i] = wrap_phase(std::arg(w[i]));
    return phases;
  };

  return {phases_of(project(true)), phases_of(project(false))};
}

std::vector<double> normalized_spacings(const std::vector<double>& phases) {
  if (phases.size() < 2) throw contract_error("need at least two eigenphases");
  std::vector<double> sorted = phases;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> spacings(sorted.size());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    spacings[i] = sorted[i + 1] - sorted[i];
    sum += spacings[i];
  }
  spacings.back() =
      sorted.front() + 2.0 * std::numbers::pi - sorted.back();  // wraparound
  sum += spacings.back();
  const double mean = sum / static_cast<double>(spacings.size());
  for (auto& s : spacings) s /= mean;
  return spacings;
}

namespace {

double ks_distance(std::vector<double> x, double (*cdf)(double)) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double wigner_cdf(double s) {
  return 1.0 - std::exp(-std::numbers::pi * s * s / 4.0);
}
double poisson_cdf(double s) { return 1.0 - std::exp(-s); }

}  // namespace

double kolmogorov_distance_wigner(std::vector<double> spacings) {
  return ks_distance(std::move(spacings), &wigner_cdf);
}
double kolmogorov_distance_poisson(std::vector<double> spacings) {
  return ks_distance(std::move(spacings), &poisson_cdf);
}

}  // namespace sawsim::floquet
