#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "sawsim/core.hpp"
#include "sawsim/imperfect.hpp"

namespace sawsim::floquet {

/// Eigenphases and orthonormal eigenvectors of a one-kick unitary, with
/// certified residuals. Eigenphases are sorted ascending in (-pi, pi]; each
/// eigenvector's largest-magnitude component is made real-positive so
/// overlap-based continuation and entropies are gauge-stable.
struct FloquetSpectrum {
  Eigen::VectorXd eigenphases;
  Eigen::MatrixXcd eigenvectors;
  double max_residual = 0.0;  // max_a |U phi_a - e^{i lambda_a} phi_a|
  double ortho_defect = 0.0;  // max |Phi^H Phi - I|

  Eigen::Index dim() const { return eigenphases.size(); }
};

inline constexpr std::size_t kDefaultMaxDim = 4096;  // 2^12

/// Column j is the gate-level kick applied to basis state j; a frozen
/// realization is shared by all columns. Throws resource_error above max_dim.
Eigen::MatrixXcd build_floquet_matrix(
    const MapParams& params,
    const std::optional<imperfect::ImperfectionSpec>& spec = std::nullopt,
    const std::optional<imperfect::DisorderRealization>& real = std::nullopt,
    std::size_t max_dim = kDefaultMaxDim, int jobs = 0);

double unitarity_defect(const Eigen::MatrixXcd& u);

/// Schur decomposition of a normal (unitary) matrix; the Schur vectors are
/// the eigenvectors. Residual and orthonormality certification is mandatory:
/// throws diagnostics_error if either exceeds 1e-8, and contract_error if the
/// input's unitarity defect exceeds 1e-6.
FloquetSpectrum eigendecompose(const Eigen::MatrixXcd& u);

struct SpectralSweep {
  std::vector<double> epsilons;
  // branch-major: value(step, branch). overlap row 0 is all ones.
  Eigen::MatrixXd eigenphases;
  Eigen::MatrixXd overlaps;
  std::vector<std::vector<bool>> flagged;  // overlap < 0.5 on that step
};

/// Observer gets (step index, spectrum at that epsilon, branch -> column map).
using SweepObserver =
    std::function<void(std::size_t, const FloquetSpectrum&,
                       const std::vector<int>&)>;

/// Eigenphase branches continued through an ascending epsilon grid by maximal
/// eigenvector overlap between adjacent points. The realization `unit_real`
/// must be sampled at unit strength; only epsilon scales along the grid.
SpectralSweep sweep_spectrum(const MapParams& params,
                             const imperfect::ImperfectionSpec& spec_template,
                             const imperfect::DisorderRealization& unit_real,
                             const std::vector<double>& eps_grid, int jobs = 0,
                             const SweepObserver& observer = {});

/// Parity j -> (N - j) mod N commutes with the ideal kick; quasienergy
/// spacing statistics are meaningful only inside one symmetry sector.
/// Returns the two sector spectra (even, odd) of the ideal Floquet operator.
std::pair<std::vector<double>, std::vector<double>> parity_sector_eigenphases(
    const MapParams& params, int jobs = 0);

/// Nearest-neighbor spacings of circular eigenphases, normalized to unit mean.
std::vector<double> normalized_spacings(const std::vector<double>& phases);

double kolmogorov_distance_wigner(std::vector<double> spacings);
double kolmogorov_distance_poisson(std::vector<double> spacings);

}  // namespace sawsim::floquet
