#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sawsim/diagnostics.hpp"

namespace sawsim::exp {

enum class Experiment { spectrum, husimi, entropy, threshold, fidelity };

std::string experiment_name(Experiment e);
Experiment parse_experiment(const std::string& name);

/// Log-spaced strength grid; epsilon = 0 only as the explicit extra point.
struct EpsGrid {
  double min = 1e-5;
  double max = 1e-3;
  int count = 9;
  bool include_zero = false;

  std::vector<double> points() const;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::entropy;
  std::vector<int> n_qs = {4};  // threshold runs the whole list
  double cap_k = 1.4142135623730951;
  std::string model = "static";  // static | single
  double j_ratio = 0.0;          // coupling range J as a multiple of delta
  int impurity_qubit = -1;       // single model; -1 cycles with realization
  double tau_g = 1.0;
  EpsGrid eps;
  int realizations = 10;
  std::uint64_t seed = 0x53415753u;
  std::string init = "eig:0";  // fidelity: eig:IDX | mom:N
  int t_max = 1000;
  int level = 0;  // tracked eigenphase branch, by index at eps = 0
  int grid_theta = 64;
  int grid_p = 64;
  double husimi_s = 1.0;
  std::vector<double> husimi_eps;  // spectrum: emit grids at these epsilons
  std::string out_dir = ".";
  int jobs = 0;        // 0 = hardware concurrency
  std::string run_id;  // assigned at run start; replay reuses the recorded one

  diag::DisorderModel disorder_model() const;

  /// Throws domain_error naming the offending field. Matrix-building
  /// experiments are capped at n_q <= 12; fidelity with a momentum initial
  /// state never materializes the matrix and is allowed up to n_q <= 16.
  void validate() const;

  std::string to_json() const;
  static ExperimentConfig from_json_text(const std::string& text);
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 3 partial failure (failed tasks marked in files)
  std::vector<std::string> files;  // paths written, manifest last
  std::string manifest_path;
};

/// Executes a validated config and writes <experiment>-<run_id>.csv,
/// matching .meta.json sidecars, and manifest.json into out_dir.
RunResult run(const ExperimentConfig& config);

/// Re-executes the config recorded in a manifest; output CSVs are
/// bit-identical to the original run (the manifest's run_id is reused).
RunResult replay(const std::string& manifest_path,
                 const std::string& out_dir_override = "");

}  // namespace sawsim::exp
