#include "sawsim/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include "csv.hpp"
#include "parallel.hpp"
#include "sawsim/gates.hpp"
#include "sawsim/kernels.hpp"
#include "sawsim/sawtooth.hpp"

namespace sawsim::exp {

namespace fs = std::filesystem;
using nlohmann::json;
using detail::CsvWriter;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kMatrixMaxQubits = 12;
constexpr int kFidelityMaxQubits = 16;

std::string make_run_id() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

struct TaskStatus {
  std::string name;
  bool ok = true;
  std::string message;
};

struct Context {
  ExperimentConfig config;
  SeedPlan plan;
  std::vector<std::string> files;
  std::vector<TaskStatus> tasks;
  std::vector<std::uint64_t> task_seeds;
  json meta;
  bool partial = false;

  std::string path_for(const std::string& suffix) const {
    return (fs::path(config.out_dir) /
            (experiment_name(config.experiment) + "-" + config.run_id + suffix))
        .string();
  }
  void add_task(const std::string& name, bool ok,
                const std::string& message = "") {
    tasks.push_back({name, ok, message});
    if (!ok) partial = true;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open for writing: " + path);
  out << text;
}

json fit_to_json(const diag::ExpFit& fit) {
  return json{{"valid", fit.valid},       {"rate", fit.rate},
              {"t_f", fit.t_f},           {"floor_est", fit.floor_est},
              {"window_lo", fit.t_lo},    {"window_hi", fit.t_hi},
              {"sse", fit.sse}};
}

json shape_to_json(const diag::DecayShape& shape) {
  return json{{"sse_linear", shape.sse_linear},
              {"sse_quadratic", shape.sse_quadratic},
              {"c_linear", shape.c_linear},
              {"c_quadratic", shape.c_quadratic},
              {"gaussian_preferred", shape.gaussian_preferred},
              {"n_points", shape.n_points}};
}

}  // namespace

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::spectrum:
      return "spectrum";
    case Experiment::husimi:
      return "husimi";
    case Experiment::entropy:
      return "entropy";
    case Experiment::threshold:
      return "threshold";
    case Experiment::fidelity:
      return "fidelity";
  }
  return "?";
}

Experiment parse_experiment(const std::string& name) {
  if (name == "spectrum") return Experiment::spectrum;
  if (name == "husimi") return Experiment::husimi;
  if (name == "entropy") return Experiment::entropy;
  if (name == "threshold") return Experiment::threshold;
  if (name == "fidelity") return Experiment::fidelity;
  throw domain_error("unknown experiment '" + name + "'");
}

std::vector<double> EpsGrid::points() const {
  std::vector<double> pts;
  if (include_zero) pts.push_back(0.0);
  if (count == 1) {
    pts.push_back(min);
    return pts;
  }
  const double lmin = std::log(min);
  const double lmax = std::log(max);
  for (int i = 0; i < count; ++i)
    pts.push_back(std::exp(lmin + (lmax - lmin) * i / (count - 1)));
  return pts;
}

diag::DisorderModel ExperimentConfig::disorder_model() const {
  diag::DisorderModel m;
  m.single_impurity = model == "single";
  m.j_ratio = j_ratio;
  m.tau_g = tau_g;
  m.impurity_qubit = impurity_qubit;
  return m;
}

void ExperimentConfig::validate() const {
  if (n_qs.empty()) throw domain_error("config.nq: at least one qubit count");
  for (int nq : n_qs) {
    if (nq < 2) throw domain_error("config.nq: must be >= 2");
    const bool fidelity_run = experiment == Experiment::fidelity;
    const bool needs_matrix =
        !fidelity_run || init.rfind("eig:", 0) == 0;
    if (fidelity_run && nq > kFidelityMaxQubits)
      throw resource_error("config.nq: fidelity runs are capped at n_q <= 16");
    if (needs_matrix && nq > kMatrixMaxQubits)
      throw resource_error(
          "config.nq: matrix-building experiments are capped at n_q <= 12 (a "
          "dense 2^12 x 2^12 complex matrix is ~256 MB)");
  }
  if (model != "static" && model != "single")
    throw domain_error("config.model: must be 'static' or 'single'");
  if (j_ratio < 0.0) throw domain_error("config.j-coupling: must be >= 0");
  if (tau_g <= 0.0) throw domain_error("config.tau-g: must be > 0");
  if (eps.min <= 0.0)
    throw domain_error(
        "config.eps-min: must be > 0 (epsilon = 0 is the explicit extra "
        "point, --include-zero)");
  if (eps.max < eps.min)
    throw domain_error("config.eps-max: must be >= eps-min");
  if (eps.count < 1) throw domain_error("config.eps-count: must be >= 1");
  if (realizations < 1)
    throw domain_error("config.realizations: must be >= 1");
  if (t_max < 0) throw domain_error("config.tmax: must be >= 0");
  if (grid_theta < 2 || grid_p < 2)
    throw domain_error("config.grid: must be at least 2x2");
  if (husimi_s <= 0.0) throw domain_error("config.husimi-s: must be > 0");
  if (level < 0 || level >= (1L << n_qs.front()))
    throw domain_error("config.level: outside [0, 2^n_q)");
  if (impurity_qubit >= n_qs.front())
    throw domain_error("config.impurity-qubit: outside the register");
  diag::InitState::parse(init);
  // all paths must be writable now, not at first output
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw domain_error("config.out: cannot create '" + out_dir + "'");
  const auto probe = fs::path(out_dir) / ".sawsim-write-probe";
  {
    std::ofstream f(probe);
    if (!f) throw domain_error("config.out: '" + out_dir + "' not writable");
  }
  fs::remove(probe, ec);
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = experiment_name(experiment);
  j["nq"] = n_qs;
  j["K"] = cap_k;
  j["model"] = model;
  j["j_ratio"] = j_ratio;
  j["impurity_qubit"] = impurity_qubit;
  j["tau_g"] = tau_g;
  j["eps"] = {{"min", eps.min},
              {"max", eps.max},
              {"count", eps.count},
              {"include_zero", eps.include_zero}};
  j["realizations"] = realizations;
  j["seed"] = seed;
  j["init"] = init;
  j["tmax"] = t_max;
  j["level"] = level;
  j["grid_theta"] = grid_theta;
  j["grid_p"] = grid_p;
  j["husimi_s"] = husimi_s;
  j["husimi_eps"] = husimi_eps;
  j["out"] = out_dir;
  j["jobs"] = jobs;
  j["run_id"] = run_id;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig c;
  c.experiment = parse_experiment(j.at("experiment").get<std::string>());
  c.n_qs = j.at("nq").get<std::vector<int>>();
  c.cap_k = j.at("K").get<double>();
  c.model = j.at("model").get<std::string>();
  c.j_ratio = j.at("j_ratio").get<double>();
  c.impurity_qubit = j.at("impurity_qubit").get<int>();
  c.tau_g = j.at("tau_g").get<double>();
  c.eps.min = j.at("eps").at("min").get<double>();
  c.eps.max = j.at("eps").at("max").get<double>();
  c.eps.count = j.at("eps").at("count").get<int>();
  c.eps.include_zero = j.at("eps").at("include_zero").get<bool>();
  c.realizations = j.at("realizations").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.init = j.at("init").get<std::string>();
  c.t_max = j.at("tmax").get<int>();
  c.level = j.at("level").get<int>();
  c.grid_theta = j.at("grid_theta").get<int>();
  c.grid_p = j.at("grid_p").get<int>();
  c.husimi_s = j.at("husimi_s").get<double>();
  c.husimi_eps = j.at("husimi_eps").get<std::vector<double>>();
  c.out_dir = j.at("out").get<std::string>();
  c.jobs = j.at("jobs").get<int>();
  c.run_id = j.at("run_id").get<std::string>();
  return c;
}

namespace {

void run_entropy_experiment(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto params = MapParams::make(cfg.n_qs.front(), cfg.cap_k);
  const auto grid = cfg.eps.points();
  const auto model = cfg.disorder_model();
  const auto scan = diag::entropy_scan(params, model, grid, cfg.realizations,
                                       ctx.plan, cfg.jobs);

  const std::string csv_path = ctx.path_for(".csv");
  CsvWriter csv(csv_path);
  csv.header({"eps", "mean_S", "stderr_S", "n_realizations", "n_q", "model",
              "S_pred_single", "S_pred_static", "status"});
  json audit = json::array();
  for (const auto& pt : scan) {
    std::string pred_single = "nan", pred_static = "nan";
    if (pt.epsilon > 0.0) {
      pred_single = CsvWriter::num(
          diag::predict(diag::Formula::entropy_single, pt.epsilon, pt.n_q));
      pred_static = CsvWriter::num(
          diag::predict(diag::Formula::entropy_static, pt.epsilon, pt.n_q));
    }
    csv.line({CsvWriter::num(pt.epsilon), CsvWriter::num(pt.mean_s),
              CsvWriter::num(pt.stderr_s), CsvWriter::num(pt.n_realizations),
              CsvWriter::num(pt.n_q), pt.model, pred_single, pred_static,
              pt.ok ? "ok" : "failed"});
    ctx.add_task("entropy eps=" + CsvWriter::num(pt.epsilon), pt.ok, pt.error);
    for (auto s : pt.seeds) ctx.task_seeds.push_back(s);
    audit.push_back({{"eps", pt.epsilon},
                     {"mean_S", pt.mean_s},
                     {"stderr_S", pt.stderr_s},
                     {"seeds", pt.seeds}});
  }
  ctx.files.push_back(csv_path);
  ctx.meta["points"] = audit;
  ctx.meta["constants"] = {{"A", 0.37}, {"B", 0.25}};
}

// Evaluates mean entropy at single strengths with stable seed indices, for
// the adaptive threshold search.
struct EntropyProbe {
  const MapParams& params;
  const diag::DisorderModel& model;
  const ExperimentConfig& cfg;
  const SeedPlan& plan;
  const floquet::FloquetSpectrum* reference;
  std::uint64_t counter = 0;
  diag::EntropyScan evaluated;
  std::vector<std::uint64_t>* seeds;

  diag::EntropyPoint at(double eps) {
    auto scan = diag::entropy_scan(params, model, {eps}, cfg.realizations,
                                   plan, cfg.jobs, reference, counter++);
    auto pt = scan.front();
    if (!pt.ok && pt.n_realizations == 0)
      throw error("entropy evaluation failed at eps=" + CsvWriter::num(eps) +
                  ": " + pt.error);
    evaluated.push_back(pt);
    for (auto s : pt.seeds) seeds->push_back(s);
    return pt;
  }
};

void run_threshold_experiment(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto model = cfg.disorder_model();

  const std::string csv_path = ctx.path_for(".csv");
  CsvWriter csv(csv_path);
  csv.header({"n_q", "eps_chi", "eps_lo", "eps_hi", "s_lo", "s_hi",
              "theory_eps_chi", "eps_2s_extrap", "status"});
  json audit = json::array();

  for (int nq : cfg.n_qs) {
    const auto params = MapParams::make(nq, cfg.cap_k);
    const double theory = diag::predict(model.single_impurity
                                            ? diag::Formula::threshold_single
                                            : diag::Formula::threshold_static,
                                        1.0, nq);
    try {
      const auto reference = floquet::eigendecompose(floquet::build_floquet_matrix(
          params, std::nullopt, std::nullopt, floquet::kDefaultMaxDim,
          cfg.jobs));
      EntropyProbe probe{params, model,      cfg,  ctx.plan,
                         &reference, 0,          {},   &ctx.task_seeds};

      // bracket S = 1 starting from the theory value, expanding by 2x
      auto pt = probe.at(theory);
      if (pt.mean_s < 1.0) {
        double eps = theory;
        for (int i = 0; i < 14 && pt.mean_s < 1.0; ++i) {
          eps *= 2.0;
          pt = probe.at(eps);
        }
      } else {
        double eps = theory;
        for (int i = 0; i < 40 && pt.mean_s >= 1.0; ++i) {
          eps /= 2.0;
          pt = probe.at(eps);
        }
      }
      {
        // refine with 5 log-spaced interior points on the bracketing decade
        auto th0 = diag::find_threshold(probe.evaluated);
        const double llo = std::log(th0.eps_lo), lhi = std::log(th0.eps_hi);
        for (int i = 1; i <= 5; ++i)
          probe.at(std::exp(llo + (lhi - llo) * i / 6.0));
      }
      const auto th = diag::find_threshold(probe.evaluated);

      // extrapolate the fitted mixing line 2^S = c eps^m down to 2^S = 1
      double eps_2s1 = std::nan("");
      {
        std::vector<double> xs, ys;
        for (const auto& p : probe.evaluated)
          if (p.ok && p.mean_s >= 1.0 && p.mean_s <= nq - 2.0) {
            xs.push_back(std::log(p.epsilon));
            ys.push_back(p.mean_s * std::numbers::ln2);
          }
        if (xs.size() >= 2) {
          double sx = 0, sy = 0, sxx = 0, sxy = 0;
          for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
          }
          const double m = static_cast<double>(xs.size());
          const double denom = m * sxx - sx * sx;
          if (denom != 0.0) {
            const double slope = (m * sxy - sx * sy) / denom;
            const double inter = (sy - slope * sx) / m;
            if (slope > 0.0) eps_2s1 = std::exp(-inter / slope);
          }
        }
      }

      csv.line({CsvWriter::num(nq), CsvWriter::num(th.eps_chi),
                CsvWriter::num(th.eps_lo), CsvWriter::num(th.eps_hi),
                CsvWriter::num(th.s_lo), CsvWriter::num(th.s_hi),
                CsvWriter::num(theory), CsvWriter::num(eps_2s1), "ok"});
      ctx.add_task("threshold n_q=" + std::to_string(nq), true);
      json pts = json::array();
      for (const auto& p : probe.evaluated)
        pts.push_back({{"eps", p.epsilon},
                       {"mean_S", p.mean_s},
                       {"stderr_S", p.stderr_s},
                       {"ok", p.ok}});
      audit.push_back({{"n_q", nq}, {"evaluations", pts}});
    } catch (const std::exception& ex) {
      csv.line({CsvWriter::num(nq), "nan", "nan", "nan", "nan", "nan",
                CsvWriter::num(theory), "nan", "failed"});
      ctx.add_task("threshold n_q=" + std::to_string(nq), false, ex.what());
      audit.push_back({{"n_q", nq}, {"error", ex.what()}});
    }
  }
  ctx.files.push_back(csv_path);
  ctx.meta["search"] = audit;
  ctx.meta["constants"] = {{"A", 0.37}, {"B", 0.25}};
}

void run_spectrum_experiment(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto params = MapParams::make(cfg.n_qs.front(), cfg.cap_k);
  const auto model = cfg.disorder_model();
  const auto grid = cfg.eps.points();

  const auto unit_spec = model.spec_at(model.tau_g, params.n_q, 0);
  const auto unit_real = imperfect::sample_realization(
      unit_spec, params.n_q, ctx.plan.task_seed(params.n_q, 0, 0));
  ctx.task_seeds.push_back(unit_real.seed);

  // snap requested husimi strengths to grid points
  std::set<std::size_t> husimi_steps;
  for (double eps : cfg.husimi_eps) {
    std::size_t best = 0;
    double dist = std::abs(grid[0] - eps);
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (std::abs(grid[i] - eps) < dist) {
        dist = std::abs(grid[i] - eps);
        best = i;
      }
    husimi_steps.insert(best);
  }
  std::map<std::size_t, Eigen::VectorXcd> captured;
  auto observer = [&](std::size_t step, const floquet::FloquetSpectrum& spec,
                      const std::vector<int>& branch_col) {
    if (husimi_steps.count(step))
      captured[step] = spec.eigenvectors.col(branch_col[cfg.level]);
  };

  const auto sweep = floquet::sweep_spectrum(params, unit_spec, unit_real,
                                             grid, cfg.jobs, observer);

  const std::string csv_path = ctx.path_for(".csv");
  CsvWriter csv(csv_path);
  csv.header({"eps", "branch_id", "eigenphase", "continuation_overlap",
              "flagged"});
  for (std::size_t s = 0; s < sweep.epsilons.size(); ++s)
    for (Eigen::Index b = 0; b < sweep.eigenphases.cols(); ++b)
      csv.line({CsvWriter::num(sweep.epsilons[s]), CsvWriter::num(b),
                CsvWriter::num(sweep.eigenphases(s, b)),
                CsvWriter::num(sweep.overlaps(s, b)),
                sweep.flagged[s][b] ? "1" : "0"});
  ctx.files.push_back(csv_path);
  ctx.add_task("spectrum sweep", true);

  json husimi_meta = json::array();
  for (const auto& [step, vec] : captured) {
    StateVector state;
    state.amps.assign(vec.data(), vec.data() + vec.size());
    state.basis = Basis::momentum;
    const auto grid_h =
        diag::husimi(state, params, cfg.grid_theta, cfg.grid_p, cfg.husimi_s);
    const std::string hpath =
        ctx.path_for("-husimi-e" + std::to_string(step) + ".csv");
    CsvWriter hcsv(hpath);
    for (int ip = 0; ip < grid_h.n_p; ++ip) {
      std::vector<std::string> row;
      for (int it = 0; it < grid_h.n_theta; ++it)
        row.push_back(CsvWriter::num(grid_h.value(ip, it)));
      hcsv.line(row);
    }
    ctx.files.push_back(hpath);
    husimi_meta.push_back(
        {{"step", step},
         {"eps", sweep.epsilons[step]},
         {"file", fs::path(hpath).filename().string()},
         {"symmetry_deviation", diag::husimi_symmetry_deviation(grid_h)},
         {"grid_integral", grid_h.integral()}});
  }
  ctx.meta["husimi"] = husimi_meta;
  ctx.meta["realization"] = json::parse(unit_real.to_json());
  ctx.meta["level"] = cfg.level;
}

void run_husimi_experiment(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto params = MapParams::make(cfg.n_qs.front(), cfg.cap_k);
  const auto model = cfg.disorder_model();
  const auto grid = cfg.eps.points();

  const auto unit_spec = model.spec_at(model.tau_g, params.n_q, 0);
  const auto unit_real = imperfect::sample_realization(
      unit_spec, params.n_q, ctx.plan.task_seed(params.n_q, 0, 0));
  ctx.task_seeds.push_back(unit_real.seed);

  std::map<std::size_t, Eigen::VectorXcd> captured;
  auto observer = [&](std::size_t step, const floquet::FloquetSpectrum& spec,
                      const std::vector<int>& branch_col) {
    captured[step] = spec.eigenvectors.col(branch_col[cfg.level]);
  };
  const auto sweep = floquet::sweep_spectrum(params, unit_spec, unit_real,
                                             grid, cfg.jobs, observer);

  const std::string csv_path = ctx.path_for(".csv");
  CsvWriter csv(csv_path);
  csv.header({"eps", "symmetry_deviation", "grid_integral", "file"});
  json panels = json::array();
  for (const auto& [step, vec] : captured) {
    StateVector state;
    state.amps.assign(vec.data(), vec.data() + vec.size());
    state.basis = Basis::momentum;
    const auto grid_h =
        diag::husimi(state, params, cfg.grid_theta, cfg.grid_p, cfg.husimi_s);
    const std::string hpath =
        ctx.path_for("-e" + std::to_string(step) + ".csv");
    CsvWriter hcsv(hpath);
    for (int ip = 0; ip < grid_h.n_p; ++ip) {
      std::vector<std::string> row;
      for (int it = 0; it < grid_h.n_theta; ++it)
        row.push_back(CsvWriter::num(grid_h.value(ip, it)));
      hcsv.line(row);
    }
    ctx.files.push_back(hpath);
    const double dev = diag::husimi_symmetry_deviation(grid_h);
    csv.line({CsvWriter::num(sweep.epsilons[step]), CsvWriter::num(dev),
              CsvWriter::num(grid_h.integral()),
              fs::path(hpath).filename().string()});
    panels.push_back({{"step", step},
                      {"eps", sweep.epsilons[step]},
                      {"symmetry_deviation", dev},
                      {"grid_integral", grid_h.integral()}});
  }
  ctx.files.push_back(csv_path);
  ctx.add_task("husimi panels", true);
  ctx.meta["panels"] = panels;
  ctx.meta["realization"] = json::parse(unit_real.to_json());
  ctx.meta["level"] = cfg.level;
  ctx.meta["grid"] = {{"n_theta", cfg.grid_theta},
                      {"n_p", cfg.grid_p},
                      {"s", cfg.husimi_s},
                      {"theta_centers", "(i+0.5)*2pi/n_theta"},
                      {"p_centers", "-pi+(i+0.5)*2pi/n_p"}};
}

void run_fidelity_experiment(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto params = MapParams::make(cfg.n_qs.front(), cfg.cap_k);
  const auto model = cfg.disorder_model();
  const auto grid = cfg.eps.points();
  const auto init = diag::InitState::parse(cfg.init);

  floquet::FloquetSpectrum reference;
  const floquet::FloquetSpectrum* ref_ptr = nullptr;
  if (init.kind == diag::InitState::Kind::floquet_eigenstate) {
    reference = floquet::eigendecompose(floquet::build_floquet_matrix(
        params, std::nullopt, std::nullopt, floquet::kDefaultMaxDim,
        cfg.jobs));
    ref_ptr = &reference;
  }

  const std::size_t n_eps = grid.size();
  const std::size_t n_real = static_cast<std::size_t>(cfg.realizations);
  struct Slot {
    std::vector<double> f;
    bool ok = false;
    std::string err;
  };
  std::vector<Slot> slots(n_eps * n_real);
  std::vector<std::uint64_t> seeds(n_eps * n_real);
  detail::parallel_for(n_eps * n_real, cfg.jobs, [&](std::size_t flat) {
    const std::size_t e = flat / n_real;
    const std::size_t r = flat % n_real;
    seeds[flat] = ctx.plan.task_seed(params.n_q, e, r);
    Slot& slot = slots[flat];
    try {
      std::optional<imperfect::ImperfectionSpec> spec;
      std::optional<imperfect::DisorderRealization> real;
      if (grid[e] > 0.0) {
        spec = model.spec_at(grid[e], params.n_q, static_cast<int>(r));
        real = imperfect::sample_realization(*spec, params.n_q, seeds[flat]);
      }
      slot.f = diag::fidelity_series(params, spec, real, init, cfg.t_max,
                                     ref_ptr)
                   .f;
      slot.ok = true;
    } catch (const std::exception& ex) {
      slot.err = ex.what();
    }
  });
  ctx.task_seeds.insert(ctx.task_seeds.end(), seeds.begin(), seeds.end());

  const std::string csv_path = ctx.path_for(".csv");
  CsvWriter csv(csv_path);
  csv.header({"eps", "t", "f"});
  json fits = json::array();
  for (std::size_t e = 0; e < n_eps; ++e) {
    std::vector<double> mean(static_cast<std::size_t>(cfg.t_max) + 1, 0.0);
    std::vector<double> rates;
    int ok_count = 0;
    std::string first_err;
    const double floor_pred =
        init.kind == diag::InitState::Kind::momentum
            ? 1.0 / static_cast<double>(params.big_n)
            : (grid[e] > 0.0
                   ? std::exp2(-std::clamp(
                         diag::predict(model.single_impurity
                                           ? diag::Formula::entropy_single
                                           : diag::Formula::entropy_static,
                                       grid[e], params.n_q),
                         0.0, static_cast<double>(params.n_q)))
                   : 1.0);
    for (std::size_t r = 0; r < n_real; ++r) {
      const Slot& slot = slots[e * n_real + r];
      if (!slot.ok) {
        if (first_err.empty()) first_err = slot.err;
        continue;
      }
      ++ok_count;
      for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += slot.f[t];
      diag::FidelitySeries one{slot.f, init.tag()};
      const auto fit = diag::fit_exponential_decay(one, floor_pred);
      if (fit.valid) rates.push_back(fit.rate);
    }
    const std::string task = "fidelity eps=" + CsvWriter::num(grid[e]);
    if (ok_count == 0) {
      ctx.add_task(task, false, first_err);
      continue;
    }
    ctx.add_task(task, first_err.empty(), first_err);
    for (auto& v : mean) v /= ok_count;
    for (std::size_t t = 0; t < mean.size(); ++t)
      csv.line({CsvWriter::num(grid[e]), CsvWriter::num(t),
                CsvWriter::num(mean[t])});

    diag::FidelitySeries mean_series{mean, init.tag()};
    const auto fit = diag::fit_exponential_decay(mean_series, floor_pred);
    const auto shape = diag::compare_decay_shapes(mean_series);
    double mean_rate = 0.0;
    for (double g : rates) mean_rate += g;
    if (!rates.empty()) mean_rate /= static_cast<double>(rates.size());
    fits.push_back({{"eps", grid[e]},
                    {"n_series", ok_count},
                    {"floor_pred", floor_pred},
                    {"fit_mean_curve", fit_to_json(fit)},
                    {"mean_realization_rate", mean_rate},
                    {"n_fitted_realizations", rates.size()},
                    {"shape", shape_to_json(shape)}});
  }
  ctx.files.push_back(csv_path);
  ctx.meta["fits"] = fits;
  ctx.meta["init"] = init.tag();
}

}  // namespace

RunResult run(const ExperimentConfig& config_in) {
  ExperimentConfig config = config_in;
  config.validate();
  if (config.run_id.empty()) config.run_id = make_run_id();
  const auto t0 = std::chrono::steady_clock::now();

  Context ctx{config, SeedPlan{config.seed}, {}, {}, {}, json::object(), false};
  switch (config.experiment) {
    case Experiment::entropy:
      run_entropy_experiment(ctx);
      break;
    case Experiment::threshold:
      run_threshold_experiment(ctx);
      break;
    case Experiment::spectrum:
      run_spectrum_experiment(ctx);
      break;
    case Experiment::husimi:
      run_husimi_experiment(ctx);
      break;
    case Experiment::fidelity:
      run_fidelity_experiment(ctx);
      break;
  }

  // sidecar metadata: everything needed to interpret the CSVs, nothing that
  // varies between identical re-runs
  json meta = ctx.meta;
  meta["config"] = json::parse(config.to_json());
  meta["kernel_isa"] = kernels::isa_name(kernels::active_isa());
  {
    json counts = json::array();
    for (int nq : config.n_qs) {
      const auto sched = gates::build_schedule(MapParams::make(nq, config.cap_k));
      counts.push_back({{"n_q", nq},
                        {"hadamard", sched.hadamard_count},
                        {"controlled_phase", sched.cp_count},
                        {"single_phase", sched.phase_count},
                        {"gates_per_kick", sched.gate_count()}});
    }
    meta["gate_counts"] = counts;
  }
  const std::string meta_path = ctx.path_for(".meta.json");
  write_text(meta_path, meta.dump(2) + "\n");
  ctx.files.push_back(meta_path);

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  json manifest;
  manifest["tool"] = "sawsim";
  manifest["version"] = kVersion;
  manifest["run_id"] = config.run_id;
  manifest["config"] = json::parse(config.to_json());
  manifest["task_seeds"] = ctx.task_seeds;
  manifest["gate_counts"] = meta["gate_counts"];
  json tasks = json::array();
  for (const auto& t : ctx.tasks)
    tasks.push_back({{"name", t.name}, {"ok", t.ok}, {"message", t.message}});
  manifest["tasks"] = tasks;
  json file_names = json::array();
  for (const auto& f : ctx.files)
    file_names.push_back(fs::path(f).filename().string());
  manifest["files"] = file_names;
  manifest["wall_seconds"] = wall;

  RunResult result;
  result.manifest_path =
      (fs::path(config.out_dir) / "manifest.json").string();
  write_text(result.manifest_path, manifest.dump(2) + "\n");
  result.files = ctx.files;
  result.files.push_back(result.manifest_path);
  result.exit_code = ctx.partial ? 3 : 0;
  return result;
}

RunResult replay(const std::string& manifest_path,
                 const std::string& out_dir_override) {
  std::ifstream in(manifest_path);
  if (!in) throw error("cannot read manifest: " + manifest_path);
  const json manifest = json::parse(in);
  ExperimentConfig config =
      ExperimentConfig::from_json_text(manifest.at("config").dump());
  if (!out_dir_override.empty()) config.out_dir = out_dir_override;
  return run(config);
}

}  // namespace sawsim::exp
