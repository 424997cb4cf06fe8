#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sawsim/core.hpp"
#include "sawsim/floquet.hpp"
#include "sawsim/imperfect.hpp"

namespace sawsim::diag {

/// p(alpha, beta) = |<phi0_beta | phiE_alpha>|^2; rows index the perturbed
/// eigenstates. Doubly stochastic up to the certified orthonormality defects.
Eigen::MatrixXd overlap_matrix(const floquet::FloquetSpectrum& spec0,
                               const floquet::FloquetSpectrum& spec_eps);

/// S = -sum_beta p log2 p with 0 log 0 := 0, clamped to [0, n_q].
double eigenstate_entropy(std::span<const double> row);

/// Mean of eigenstate_entropy over all rows.
double mean_entropy(const Eigen::MatrixXd& overlaps);

/// Disorder model template for scans: the strength is set per grid point
/// via epsilon = delta * tau_g, everything else is frozen here.
struct DisorderModel {
  bool single_impurity = false;
  double j_ratio = 0.0;     // coupling range J as a multiple of delta
  double tau_g = 1.0;
  int impurity_qubit = -1;  // -1: cycle over qubits with realization index

  imperfect::ImperfectionSpec spec_at(double epsilon, int n_q,
                                      int realization_index) const;
  std::string tag() const { return single_impurity ? "single" : "static"; }
};

struct EntropyPoint {
  double epsilon = 0.0;
  double mean_s = 0.0;
  double stderr_s = 0.0;
  int n_realizations = 0;
  int n_q = 0;
  std::string model;
  bool ok = true;
  std::string error;
  std::vector<std::uint64_t> seeds;
};
using EntropyScan = std::vector<EntropyPoint>;

/// Samples realizations per grid point, diagonalizes the perturbed Floquet
/// operators and averages the eigenstate entropy over eigenstates and
/// realizations. Seeds derive from (n_q, eps_index + eps_index_offset,
/// realization_index). A point at epsilon == 0 is exact: the perturbed
/// operator is the unperturbed one, so S = 0 without diagonalizing.
/// Failing realizations mark the point instead of aborting the scan.
EntropyScan entropy_scan(const MapParams& params, const DisorderModel& model,
                         const std::vector<double>& eps_grid,
                         int n_realizations, const SeedPlan& plan,
                         int jobs = 0,
                         const floquet::FloquetSpectrum* reference = nullptr,
                         std::uint64_t eps_index_offset = 0);

struct Threshold {
  double eps_chi = 0.0;  // S = 1 crossing, interpolated linearly in log eps
  double eps_lo = 0.0, eps_hi = 0.0;
  double s_lo = 0.0, s_hi = 0.0;
};

/// Throws notfound_error when no bracketing pair exists (extend the grid).
Threshold find_threshold(const EntropyScan& scan);

struct InitState {
  enum class Kind { floquet_eigenstate, momentum };
  Kind kind = Kind::floquet_eigenstate;
  long index = 0;  // eigenstate index at eps = 0, or momentum quantum number

  std::string tag() const;
  static InitState parse(const std::string& text);  // "eig:IDX" | "mom:N"
};

struct FidelitySeries {
  std::vector<double> f;  // f[0] == 1
  std::string init_tag;
};

/// Co-evolves the split-operator and gate-path states from the same initial
/// state; f(t) = |<psi0(t)|psiE(t)>|^2 sampled after every kick.
FidelitySeries fidelity_series(
    const MapParams& params,
    const std::optional<imperfect::ImperfectionSpec>& spec,
    const std::optional<imperfect::DisorderRealization>& real,
    const InitState& init, int t_max,
    const floquet::FloquetSpectrum* reference = nullptr);

struct ExpFit {
  bool valid = false;
  double rate = 0.0;  // per kick
  double t_f = 0.0;   // 1 / rate
  double floor_est = 0.0;
  int t_lo = 0, t_hi = 0;  // fitted window [t_lo, t_hi)
  double sse = 0.0;
};

/// ln f regressed against t over the window t >= 3, f >= 2 * predicted_floor.
ExpFit fit_exponential_decay(const FidelitySeries& series,
                             double predicted_floor);

struct DecayShape {
  double sse_linear = 0.0;     // -ln f ~ c1 t
  double sse_quadratic = 0.0;  // -ln f ~ c2 t^2
  double c_linear = 0.0;
  double c_quadratic = 0.0;
  bool gaussian_preferred = false;
  int n_points = 0;
};

DecayShape compare_decay_shapes(const FidelitySeries& series);

struct HusimiGrid {
  int n_theta = 0, n_p = 0;
  double s = 1.0;
  double t_kick = 0.0;
  std::vector<double> values;  // row-major, values[ip * n_theta + it]

  double value(int ip, int it) const { return values[ip * n_theta + it]; }
  double theta_center(int it) const;
  double p_center(int ip) const;
  double cell_area() const;
  double integral() const;  // approx 2 pi T by the resolution of identity
};

/// Torus coherent-state projection |<coh(theta0, p0)|psi>|^2 with
/// Dp^2 = s T / 2, Dtheta^2 = T / (2 s). The wrapped momentum images carry
/// their full phase exp(-i n theta0) with the unfolded integer n, which keeps
/// the frame exactly covariant under (theta -> 2pi - theta, p -> -p).
HusimiGrid husimi(const StateVector& state, const MapParams& params,
                  int n_theta, int n_p, double s);

/// Relative deviation under (theta -> 2pi - theta, p -> -p):
/// sum |H - H o sigma| / sum (H + H o sigma).
double husimi_symmetry_deviation(const HusimiGrid& grid);

struct Ldos {
  Eigen::VectorXd weights;  // over unperturbed eigenphases, sums to 1
  double gamma = 0.0;       // Breit-Wigner width from a least-squares fit
  double center = 0.0;
  bool perturbative = false;  // all weight on one level, gamma forced to 0
  double sse = 0.0;
};

Ldos ldos(const Eigen::VectorXcd& phi_eps,
          const floquet::FloquetSpectrum& spec0);

enum class Formula {
  entropy_single,    // S = log2(A eps^2 N)
  entropy_static,    // S = log2(B eps^2 n_q^5 N)
  threshold_single,  // eps_chi = A^{-1/2} N^{-1/2}
  threshold_static,  // eps_chi = B^{-1/2} N^{-1/2} n_q^{-5/2}
  gamma_single,      // eps^2            (up to a constant)
  gamma_static,      // eps^2 n_q^5      (up to a constant)
  tau_chi_single,    // 1 / gamma
  tau_chi_static,
};

struct TheoryConstants {
  double a = 0.37;
  double b = 0.25;
};

/// Closed-form predictors. Throws domain_error for nonpositive epsilon.
double predict(Formula formula, double epsilon, int n_q,
               TheoryConstants constants = {});

}  // namespace sawsim::diag
