#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "sawsim/experiment.hpp"

namespace {

using sawsim::exp::Experiment;
using sawsim::exp::ExperimentConfig;

void add_common_options(CLI::App* sub, ExperimentConfig& cfg, int& grid) {
  sub->set_config("--config", "", "configuration file (key=value, sections ok)");
  sub->add_option("--nq", cfg.n_qs,
                  "qubit count(s); only threshold accepts a list")
      ->delimiter(',');
  sub->add_option("--K", cfg.cap_k, "chaos parameter K");
  sub->add_option("--model", cfg.model, "imperfection model: static | single")
      ->check(CLI::IsMember({"static", "single"}));
  sub->add_option("--j-coupling", cfg.j_ratio,
                  "coupling range J as a multiple of delta (static model)");
  sub->add_option("--impurity-qubit", cfg.impurity_qubit,
                  "single model: fixed qubit index, or -1 to cycle per "
                  "realization");
  sub->add_option("--tau-g", cfg.tau_g, "inter-gate interval");
  sub->add_option("--eps-min", cfg.eps.min, "strength grid minimum (> 0)");
  sub->add_option("--eps-max", cfg.eps.max, "strength grid maximum");
  sub->add_option("--eps-count", cfg.eps.count, "log-spaced point count");
  sub->add_flag("--include-zero", cfg.eps.include_zero,
                "prepend the exact epsilon = 0 point");
  sub->add_option("--realizations", cfg.realizations,
                  "disorder realizations per grid point");
  sub->add_option("--seed", cfg.seed, "master seed");
  sub->add_option("--init", cfg.init, "fidelity initial state: eig:IDX | mom:N");
  sub->add_option("--tmax", cfg.t_max, "kicks to evolve (fidelity)");
  sub->add_option("--level", cfg.level,
                  "tracked eigenphase branch, by index at eps = 0");
  sub->add_option("--grid", grid, "Husimi grid cells per axis");
  sub->add_option("--husimi-s", cfg.husimi_s, "action-angle uncertainty ratio");
  sub->add_option("--husimi-eps", cfg.husimi_eps,
                  "spectrum: emit Husimi grids at these strengths")
      ->delimiter(',');
  sub->add_option("--out", cfg.out_dir, "output directory");
  sub->add_option("--jobs", cfg.jobs, "worker threads (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sawtooth-map quantum register simulator with static "
               "imperfections and Floquet diagnostics"};
  app.require_subcommand(1);

  int exit_code = 0;
  ExperimentConfig cfg;
  int grid = 64;

  const struct {
    const char* name;
    Experiment experiment;
    const char* help;
  } subs[] = {
      {"spectrum", Experiment::spectrum,
       "quasienergy branches across an epsilon sweep"},
      {"husimi", Experiment::husimi,
       "phase-space distributions of a tracked eigenstate"},
      {"entropy", Experiment::entropy,
       "disorder-averaged eigenstate entropy scan"},
      {"threshold", Experiment::threshold,
       "adaptive search for the S = 1 mixing threshold"},
      {"fidelity", Experiment::fidelity,
       "ideal-vs-imperfect evolution overlap over time"},
  };
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common_options(sub, cfg, grid);
    sub->callback([&, exp_kind = s.experiment] {
      cfg.experiment = exp_kind;
      cfg.grid_theta = cfg.grid_p = grid;
      const auto result = sawsim::exp::run(cfg);
      for (const auto& f : result.files) std::printf("wrote %s\n", f.c_str());
      exit_code = result.exit_code;
    });
  }

  std::string manifest_path, out_override;
  auto* replay = app.add_subcommand(
      "replay", "re-run a recorded manifest; outputs are bit-identical");
  replay->add_option("manifest", manifest_path, "path to manifest.json")
      ->required();
  replay->add_option("--out", out_override, "override output directory");
  replay->callback([&] {
    const auto result = sawsim::exp::replay(manifest_path, out_override);
    for (const auto& f : result.files) std::printf("wrote %s\n", f.c_str());
    exit_code = result.exit_code;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const sawsim::resource_error& e) {
    std::fprintf(stderr, "resource guard: %s\n", e.what());
    return 4;
  } catch (const sawsim::domain_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return exit_code;
}
