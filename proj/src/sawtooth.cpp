#include "sawsim/sawtooth.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "sawsim/kernels.hpp"

namespace sawsim::sawtooth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double theta) {
  theta = std::fmod(theta, kTwoPi);
  if (theta < 0.0) theta += kTwoPi;
  return theta;
}

// Shared FFTW plans per dimension. Plan creation is not thread-safe;
// execution through the new-array interface is. Plans are created with
// FFTW_ESTIMATE so the chosen algorithm depends only on the size, keeping
// runs reproducible.
struct DftPlans {
  fftw_plan forward;   // sign -1
  fftw_plan backward;  // sign +1
};

const DftPlans& plans_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, DftPlans> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<cplx> a(n), b(n);
  auto* in = reinterpret_cast<fftw_complex*>(a.data());
  auto* out = reinterpret_cast<fftw_complex*>(b.data());
  DftPlans p;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p.forward = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, flags);
  p.backward = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_BACKWARD, flags);
  return cache.emplace(n, p).first->second;
}

}  // namespace

ClassicalPoint classical_step(const ClassicalPoint& pt, const MapParams& params,
                              bool wrap_torus) {
  ClassicalPoint next;
  next.action = pt.action + params.k_strength * (pt.theta - std::numbers::pi);
  next.theta = wrap_angle(pt.theta + params.t_kick * next.action);
  if (wrap_torus) {
    // fold p = T n into [-pi, pi)
    double p = params.t_kick * next.action;
    p = std::remainder(p, kTwoPi);
    if (p >= std::numbers::pi) p -= kTwoPi;
    next.action = p / params.t_kick;
  }
  return next;
}

struct IdealKick::Impl {
  MapParams params;
  std::vector<cplx> kick_table;     // exp(i k (theta_l - pi)^2 / 2)
  std::vector<cplx> kinetic_table;  // exp(-i T n^2 / 2) / N
  const DftPlans* plans;
  mutable std::vector<cplx> scratch;
};

IdealKick::IdealKick(const MapParams& params) : impl_(new Impl) {
  impl_->params = params;
  const std::size_t n = params.big_n;
  impl_->kick_table.resize(n);
  impl_->kinetic_table.resize(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double d = params.theta_of_index(l) - std::numbers::pi;
    impl_->kick_table[l] =
        std::polar(1.0, 0.5 * params.k_strength * d * d);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double mom = static_cast<double>(params.momentum_of_index(j));
    impl_->kinetic_table[j] =
        std::polar(1.0 / static_cast<double>(n),
                   -0.5 * params.t_kick * mom * mom);
  }
  impl_->plans = &plans_for(n);
  impl_->scratch.resize(n);
}

IdealKick::~IdealKick() = default;
IdealKick::IdealKick(IdealKick&&) noexcept = default;
IdealKick& IdealKick::operator=(IdealKick&&) noexcept = default;

void IdealKick::apply(StateVector& state) const {
  const std::size_t n = impl_->params.big_n;
  if (state.dim() != n) throw contract_error("ideal_kick: dimension mismatch");
  if (state.basis != Basis::momentum)
    throw contract_error("ideal_kick: state must be in the momentum basis");
  auto* amps = reinterpret_cast<fftw_complex*>(state.amps.data());
  auto* tmp = reinterpret_cast<fftw_complex*>(impl_->scratch.data());
  fftw_execute_dft(impl_->plans->backward, amps, tmp);
  kernels::pointwise_multiply(impl_->scratch.data(), impl_->kick_table.data(), n);
  fftw_execute_dft(impl_->plans->forward, tmp, amps);
  // the 1/N of the round trip is folded into the kinetic table
  kernels::pointwise_multiply(state.amps.data(), impl_->kinetic_table.data(), n);
}

StateVector ideal_kick(const StateVector& state, const MapParams& params) {
  StateVector out = state;
  IdealKick(params).apply(out);
  return out;
}

CircuitKick::CircuitKick(const MapParams& params,
                         std::optional<imperfect::ImperfectionSpec> spec,
                         std::optional<imperfect::DisorderRealization> real)
    : params_(params), schedule_(gates::build_schedule(params)),
      spec_(std::move(spec)) {
  if (spec_.has_value() != real.has_value())
    throw contract_error(
        "circuit_kick: spec and realization must both be present or absent");
  if (!spec_) return;
  if (real->qubits() != params.n_q)
    throw contract_error("circuit_kick: realization does not match n_q");
  if (const auto* imp =
          std::get_if<imperfect::SingleImpurity>(&spec_->variant)) {
    impurity_qubit_ = imp->qubit;
    impurity_delta_tau_ = imp->delta * spec_->tau_g;
    if (impurity_qubit_ < 0 || impurity_qubit_ >= params.n_q)
      throw contract_error("circuit_kick: impurity qubit out of range");
  } else {
    propagator_.emplace(*real, spec_->tau_g, params.big_n);
  }
}

void CircuitKick::apply(StateVector& state, KickStats* stats) const {
  if (state.dim() != params_.big_n)
    throw contract_error("circuit_kick: dimension mismatch");
  if (state.basis != Basis::momentum)
    throw contract_error("circuit_kick: state must be in the momentum basis");
  std::size_t updates = 0, events = 0, props = 0;
  for (const auto& ev : schedule_.events) {
    updates += gates::apply_event(state, ev);
    if (ev.is_gate()) {
      ++events;
      if (propagator_) {
        updates += propagator_->apply(state);
        ++props;
      }
    } else if (ev.kind == gates::GateKind::impurity_marker &&
               impurity_qubit_ >= 0) {
      updates += imperfect::apply_impurity_propagator(state, impurity_qubit_,
                                                      impurity_delta_tau_);
      ++props;
    }
  }
  if (stats) {
    stats->amplitude_updates += updates;
    stats->gate_events += events;
    stats->propagator_applications += props;
  }
}

StateVector circuit_kick(
    const StateVector& state, const MapParams& params,
    const std::optional<imperfect::ImperfectionSpec>& spec,
    const std::optional<imperfect::DisorderRealization>& real) {
  StateVector out = state;
  CircuitKick(params, spec, real).apply(out);
  return out;
}

}  // namespace sawsim::sawtooth
