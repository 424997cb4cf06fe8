#pragma once

#include <memory>
#include <optional>

#include "sawsim/core.hpp"
#include "sawsim/gates.hpp"
#include "sawsim/imperfect.hpp"

namespace sawsim::sawtooth {

struct ClassicalPoint {
  double action = 0.0;  // n, real valued
  double theta = 0.0;   // in [0, 2*pi)
};

/// One step of the classical map: n' = n + k (theta - pi),
/// theta' = (theta + T n') mod 2*pi. With wrap_torus the rescaled momentum
/// p = T n' is folded into [-pi, pi).
ClassicalPoint classical_step(const ClassicalPoint& pt, const MapParams& params,
                              bool wrap_torus = true);

/// Split-operator kick, momentum basis in and out:
/// exp(-i T n^2 / 2) . DFT . exp(i k (theta - pi)^2 / 2) . DFT^{-1}.
/// Uses an exact fast DFT, independent of the gate path; the two
/// implementations cross-validate each other.
class IdealKick {
 public:
  explicit IdealKick(const MapParams& params);
  ~IdealKick();
  IdealKick(IdealKick&&) noexcept;
  IdealKick& operator=(IdealKick&&) noexcept;

  void apply(StateVector& state) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

StateVector ideal_kick(const StateVector& state, const MapParams& params);

struct KickStats {
  std::size_t amplitude_updates = 0;
  std::size_t gate_events = 0;
  std::size_t propagator_applications = 0;
};

/// Gate-level kick. Applies the schedule's events in order; in the static
/// model every gate event is followed by one tau_g propagator, in the
/// single-impurity model the impurity propagator acts once, at the marker
/// after the first QFT. Both spec and realization present, or neither.
class CircuitKick {
 public:
  CircuitKick(const MapParams& params,
              std::optional<imperfect::ImperfectionSpec> spec = std::nullopt,
              std::optional<imperfect::DisorderRealization> real = std::nullopt);

  void apply(StateVector& state, KickStats* stats = nullptr) const;
  const gates::GateSchedule& schedule() const { return schedule_; }

 private:
  MapParams params_;
  gates::GateSchedule schedule_;
  std::optional<imperfect::ImperfectionSpec> spec_;
  std::optional<imperfect::StaticPropagator> propagator_;
  int impurity_qubit_ = -1;
  double impurity_delta_tau_ = 0.0;
};

StateVector circuit_kick(
    const StateVector& state, const MapParams& params,
    const std::optional<imperfect::ImperfectionSpec>& spec = std::nullopt,
    const std::optional<imperfect::DisorderRealization>& real = std::nullopt);

}  // namespace sawsim::sawtooth
