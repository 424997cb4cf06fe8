#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sawsim/core.hpp"

namespace sawsim::imperfect {

/// Frozen qubit detunings delta_i in [-delta/2, delta/2] and nearest-neighbor
/// sigma_x sigma_x couplings in [-J, J] on an open chain.
struct StaticChain {
  double delta = 0.0;
  double j_coupling = 0.0;
};

/// A single detuning of fixed strength on one qubit, acting for exactly one
/// inter-gate interval per kick (at the schedule's marker).
struct SingleImpurity {
  int qubit = 0;
  double delta = 0.0;
};

struct ImperfectionSpec {
  std::variant<StaticChain, SingleImpurity> variant;
  double tau_g = 1.0;

  double delta() const;
  /// epsilon = delta * tau_g, the single dimensionless control parameter.
  double epsilon() const { return delta() * tau_g; }
  bool is_single_impurity() const {
    return std::holds_alternative<SingleImpurity>(variant);
  }

  static ImperfectionSpec static_chain(double delta, double j_coupling,
                                       double tau_g = 1.0);
  static ImperfectionSpec single_impurity(int qubit, double delta,
                                          double tau_g = 1.0);
};

struct DisorderRealization {
  std::vector<double> deltas;     // n_q values
  std::vector<double> couplings;  // n_q - 1 bond values
  std::uint64_t seed = 0;

  int qubits() const { return static_cast<int>(deltas.size()); }
  /// Same draw scaled by a factor; a sweep freezes one realization and lets
  /// only epsilon scale.
  DisorderRealization scaled(double factor) const;
  std::string to_json() const;
};

/// Uniform independent draws inside the spec intervals, deterministic in the
/// seed. SingleImpurity yields the fixed delta on the specified qubit and
/// zero couplings.
DisorderRealization sample_realization(const ImperfectionSpec& spec, int n_q,
                                       std::uint64_t seed);

/// exp(-i tau_g H') with H' = sum_i delta_i Z_i + sum_i J_i X_i X_{i+1},
/// applied to the register bits independent of the basis tag. Exact diagonal
/// phase for zero couplings; otherwise a symmetric split (half Z, even bonds,
/// odd bonds, half Z) with third-order error in tau_g.
class StaticPropagator {
 public:
  StaticPropagator(const DisorderRealization& real, double tau_g,
                   std::size_t dim);
  std::size_t apply(StateVector& state) const;

 private:
  std::vector<cplx> z_phase_;  // full step when no couplings, else half step
  std::vector<std::pair<int, double>> bonds_;  // (lower qubit, J_i tau_g)
  bool has_couplings_ = false;
};

std::size_t apply_static_propagator(StateVector& state,
                                    const DisorderRealization& real,
                                    double tau_g);

/// exp(-i delta_tau Z) on one qubit.
std::size_t apply_impurity_propagator(StateVector& state, int qubit,
                                      double delta_tau);

}  // namespace sawsim::imperfect
