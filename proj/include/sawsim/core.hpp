#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sawsim {

using cplx = std::complex<double>;

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Argument outside its documented domain.
struct domain_error : error {
  using error::error;
};
/// A precondition between values was violated (dimension/basis mismatch...).
struct contract_error : error {
  using error::error;
};
/// Request exceeds a configured resource limit.
struct resource_error : error {
  using error::error;
};
/// A certified numerical tolerance was not met.
struct diagnostics_error : error {
  diagnostics_error(const std::string& msg, double worst)
      : error(msg), worst_residual(worst) {}
  double worst_residual;
};
struct notfound_error : error {
  using error::error;
};

/// Sawtooth-map parameters on the N-level torus. One register index j maps
/// to momentum n = j - N/2 (momentum basis) or angle theta = 2*pi*j/N
/// (angle basis); qubit 0 is the least significant index bit.
struct MapParams {
  int n_q = 0;             // qubit count, >= 2
  std::size_t big_n = 0;   // 2^n_q
  double cap_k = 0.0;      // K, dimensionless chaos parameter
  double t_kick = 0.0;     // T = 2*pi/N
  double k_strength = 0.0; // k = K/T, so k*T == K

  static MapParams make(int n_q, double cap_k = 1.4142135623730951);

  long momentum_of_index(std::size_t j) const {
    return static_cast<long>(j) - static_cast<long>(big_n / 2);
  }
  std::size_t index_of_momentum(long n) const;  // throws domain_error
  double theta_of_index(std::size_t l) const;
};

enum class Basis { momentum, angle };

struct StateVector {
  std::vector<cplx> amps;
  Basis basis = Basis::momentum;

  std::size_t dim() const { return amps.size(); }
  int qubits() const;
  double norm() const;
  void normalize();
};

/// <a|b> = sum_j conj(a_j) b_j. Throws contract_error on dimension or basis
/// mismatch.
cplx inner_product(const StateVector& a, const StateVector& b);

/// Momentum eigenstate |n>, -N/2 <= n < N/2.
StateVector basis_state(const MapParams& params, long n);

StateVector random_state(const MapParams& params, std::uint64_t seed);

/// Counter-based seed derivation: identical (master_seed, indices) always
/// give the identical task seed, independent of scheduling.
struct SeedPlan {
  std::uint64_t master_seed = 0;
  std::uint64_t task_seed(std::uint64_t n_q, std::uint64_t eps_index,
                          std::uint64_t realization_index) const;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// mt19937_64 with a fully specified uniform-double mapping, so draws are
/// identical across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sawsim
