#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sawsim/core.hpp"

namespace sawsim::gates {

enum class GateKind {
  hadamard,
  phase_shift,       // exp(i phi) on |1> of one qubit
  controlled_phase,  // exp(i phi) iff both qubits are |1>; symmetric
  bit_reversal,      // index relabeling after a QFT butterfly; not a gate
  global_phase,      // scalar multiplication; not a gate
  impurity_marker,   // insertion point for the single-impurity propagator
};

struct GateEvent {
  GateKind kind;
  int q1 = -1;
  int q2 = -1;
  double angle = 0.0;

  bool is_gate() const {
    return kind == GateKind::hadamard || kind == GateKind::phase_shift ||
           kind == GateKind::controlled_phase;
  }
};

/// Ordered gate list realizing one map kick, with the structural items
/// (bit reversals, global phases, the single-impurity marker) interleaved
/// at their exact positions. Imperfection exposure is one propagator
/// interval per gate event; structural items add none.
struct GateSchedule {
  int n_q = 0;
  std::vector<GateEvent> events;
  std::size_t hadamard_count = 0;
  std::size_t cp_count = 0;     // two-qubit controlled phases
  std::size_t phase_count = 0;  // single-qubit phase shifts
  std::size_t marker_index = 0; // position of impurity_marker in events

  std::size_t gate_count() const {
    return hadamard_count + cp_count + phase_count;
  }
  /// One JSON object per event: {"kind":"CP","t":[0,3],"phi":0.19634954}
  std::string trace_json_lines() const;
};

// Elementary kernels. Each returns the number of amplitude updates it
// performed and throws domain_error on out-of-range qubit indices.
std::size_t apply_hadamard(StateVector& state, int q);
std::size_t apply_phase(StateVector& state, int q, double phi);
std::size_t apply_controlled_phase(StateVector& state, int q1, int q2,
                                   double phi);

void bit_reversal_permute(StateVector& state);

enum class QftDirection {
  forward,   // angle -> momentum, kernel exp(-2 pi i j l / N) / sqrt(N)
  backward,  // momentum -> angle, kernel exp(+2 pi i j l / N) / sqrt(N)
};

/// Full transform including the internal bit-reversal relabeling; flips the
/// basis tag. forward expects an angle-basis state, backward a momentum-basis
/// state.
std::size_t qft(StateVector& state, QftDirection direction);

/// Emit the QFT butterfly events (descending Hadamard rounds with the
/// controlled phases feeding each round) followed by a bit_reversal item.
/// sign +1 realizes the backward kernel, -1 the forward one.
void append_qft_events(std::vector<GateEvent>& events, int n_q, int sign);

GateSchedule build_schedule(const MapParams& params);

/// Apply one event (gate or structural) to the state. impurity_marker is a
/// no-op here; callers owning an imperfection model act on it themselves.
std::size_t apply_event(StateVector& state, const GateEvent& ev);

}  // namespace sawsim::gates
