#include "sawsim/imperfect.hpp"

#include <cmath>
#include <cstdio>

#include "sawsim/kernels.hpp"

namespace sawsim::imperfect {

double ImperfectionSpec::delta() const {
  if (const auto* c = std::get_if<StaticChain>(&variant)) return c->delta;
  return std::get<SingleImpurity>(variant).delta;
}

ImperfectionSpec ImperfectionSpec::static_chain(double delta,
                                                double j_coupling,
                                                double tau_g) {
  if (delta < 0.0) throw domain_error("delta must be >= 0");
  if (tau_g <= 0.0) throw domain_error("tau_g must be > 0");
  return {StaticChain{delta, j_coupling}, tau_g};
}

ImperfectionSpec ImperfectionSpec::single_impurity(int qubit, double delta,
                                                   double tau_g) {
  if (delta < 0.0) throw domain_error("delta must be >= 0");
  if (tau_g <= 0.0) throw domain_error("tau_g must be > 0");
  return {SingleImpurity{qubit, delta}, tau_g};
}

DisorderRealization DisorderRealization::scaled(double factor) const {
  DisorderRealization r = *this;
  for (auto& d : r.deltas) d *= factor;
  for (auto& c : r.couplings) c *= factor;
  return r;
}

std::string DisorderRealization::to_json() const {
  std::string out = "{\"deltas\":[";
  char buf[40];
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", deltas[i]);
    out += buf;
  }
  out += "],\"couplings\":[";
  for (std::size_t i = 0; i < couplings.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", couplings[i]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "],\"seed\":%llu}",
                static_cast<unsigned long long>(seed));
  out += buf;
  return out;
}

DisorderRealization sample_realization(const ImperfectionSpec& spec, int n_q,
                                       std::uint64_t seed) {
  if (n_q < 2) throw domain_error("sample_realization: n_q must be >= 2");
  DisorderRealization real;
  real.seed = seed;
  real.deltas.assign(n_q, 0.0);
  real.couplings.assign(n_q - 1, 0.0);
  if (const auto* imp = std::get_if<SingleImpurity>(&spec.variant)) {
    if (imp->qubit < 0 || imp->qubit >= n_q)
      throw domain_error("impurity qubit out of range");
    real.deltas[imp->qubit] = imp->delta;
    return real;
  }
  const auto& chain = std::get<StaticChain>(spec.variant);
  Rng rng(seed);
  // draw order is part of the format: deltas first, then couplings, so the
  // same seed gives proportional realizations when only the ranges change
  for (auto& d : real.deltas) d = chain.delta * (rng.uniform() - 0.5);
  for (auto& c : real.couplings)
    c = chain.j_coupling * (2.0 * rng.uniform() - 1.0);
  return real;
}

StaticPropagator::StaticPropagator(const DisorderRealization& real,
                                   double tau_g, std::size_t dim) {
  const int n_q = real.qubits();
  if (dim != (std::size_t{1} << n_q))
    throw contract_error("propagator: realization size does not match state");
  for (std::size_t i = 0; i < real.couplings.size(); ++i)
    if (real.couplings[i] != 0.0) has_couplings_ = true;

  const double step = has_couplings_ ? 0.5 * tau_g : tau_g;
  z_phase_.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    double phase = 0.0;
    for (int i = 0; i < n_q; ++i) {
      const double s = (j >> i) & 1 ? -1.0 : 1.0;
      phase -= step * real.deltas[i] * s;
    }
    z_phase_[j] = std::polar(1.0, phase);
  }
  if (has_couplings_) {
    // even bonds first, then odd: bonds inside one sublattice commute, so
    // each half is applied exactly
    for (int parity = 0; parity < 2; ++parity)
      for (int i = parity; i < n_q - 1; i += 2)
        bonds_.emplace_back(i, real.couplings[i] * tau_g);
  }
}

std::size_t StaticPropagator::apply(StateVector& state) const {
  const std::size_t n = state.dim();
  if (n != z_phase_.size())
    throw contract_error("propagator: state dimension mismatch");
  kernels::pointwise_multiply(state.amps.data(), z_phase_.data(), n);
  std::size_t touched = n;
  if (!has_couplings_) return touched;
  for (const auto& [q, angle] : bonds_) {
    kernels::xx_mix_pairs(state.amps.data(), n, static_cast<unsigned>(q),
                          static_cast<unsigned>(q + 1), std::cos(angle),
                          std::sin(angle));
    touched += n;
  }
  kernels::pointwise_multiply(state.amps.data(), z_phase_.data(), n);
  return touched + n;
}

std::size_t apply_static_propagator(StateVector& state,
                                    const DisorderRealization& real,
                                    double tau_g) {
  return StaticPropagator(real, tau_g, state.dim()).apply(state);
}

std::size_t apply_impurity_propagator(StateVector& state, int qubit,
                                      double delta_tau) {
  if (qubit < 0 || qubit >= state.qubits())
    throw domain_error("impurity qubit out of range");
  const std::uint64_t bit = std::uint64_t{1} << qubit;
  kernels::masked_scale(state.amps.data(), state.dim(), bit, 0,
                        std::polar(1.0, -delta_tau));
  kernels::masked_scale(state.amps.data(), state.dim(), bit, bit,
                        std::polar(1.0, +delta_tau));
  return state.dim();
}

}  // namespace sawsim::imperfect
