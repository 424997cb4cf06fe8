#include "sawsim/gates.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>

#include "sawsim/kernels.hpp"

namespace sawsim::gates {

namespace {

void check_qubit(const StateVector& state, int q, const char* who) {
  if (q < 0 || q >= state.qubits())
    throw domain_error(std::string(who) + ": qubit index out of range");
}

// Reverse the low n_bits of v.
std::size_t reverse_bits(std::size_t v, int n_bits) {
  std::size_t r = 0;
  for (int i = 0; i < n_bits; ++i) {
    r = (r << 1) | (v & 1);
    v >>= 1;
  }
  return r;
}

}  // namespace

std::size_t apply_hadamard(StateVector& state, int q) {
  check_qubit(state, q, "apply_hadamard");
  kernels::hadamard_pairs(state.amps.data(), state.dim(),
                          static_cast<unsigned>(q));
  return state.dim();
}

std::size_t apply_phase(StateVector& state, int q, double phi) {
  check_qubit(state, q, "apply_phase");
  const std::uint64_t bit = std::uint64_t{1} << q;
  kernels::masked_scale(state.amps.data(), state.dim(), bit, bit,
                        std::polar(1.0, phi));
  return state.dim() / 2;
}

std::size_t apply_controlled_phase(StateVector& state, int q1, int q2,
                                   double phi) {
  check_qubit(state, q1, "apply_controlled_phase");
  check_qubit(state, q2, "apply_controlled_phase");
  if (q1 == q2)
    throw domain_error("apply_controlled_phase: targets must differ");
  const std::uint64_t mask =
      (std::uint64_t{1} << q1) | (std::uint64_t{1} << q2);
  kernels::masked_scale(state.amps.data(), state.dim(), mask, mask,
                        std::polar(1.0, phi));
  return state.dim() / 4;
}

void bit_reversal_permute(StateVector& state) {
  const int n_q = state.qubits();
  const std::size_t n = state.dim();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t r = reverse_bits(j, n_q);
    if (j < r) std::swap(state.amps[j], state.amps[r]);
  }
}

void append_qft_events(std::vector<GateEvent>& events, int n_q, int sign) {
  for (int q = n_q - 1; q >= 0; --q) {
    events.push_back({GateKind::hadamard, q, -1, 0.0});
    for (int m = q - 1; m >= 0; --m) {
      const double phi =
          sign * std::numbers::pi / static_cast<double>(1 << (q - m));
      events.push_back({GateKind::controlled_phase, q, m, phi});
    }
  }
  events.push_back({GateKind::bit_reversal, -1, -1, 0.0});
}

std::size_t qft(StateVector& state, QftDirection direction) {
  const Basis expected =
      direction == QftDirection::forward ? Basis::angle : Basis::momentum;
  if (state.basis != expected)
    throw contract_error("qft: state is not in the expected basis");
  const int sign = direction == QftDirection::backward ? +1 : -1;
  std::vector<GateEvent> events;
  append_qft_events(events, state.qubits(), sign);
  std::size_t touched = 0;
  for (const auto& ev : events) touched += apply_event(state, ev);
  state.basis =
      direction == QftDirection::forward ? Basis::momentum : Basis::angle;
  return touched;
}

namespace {

// exp(i c (x - N/2)^2) over register values x, as phase gates:
//   (x - N/2)^2 = sum_{i != m} a_i a_m 2^{i+m}
//               + sum_i a_i (4^i - N 2^i)  +  N^2/4.
// The double sum is emitted as ordered pairs, one controlled phase per
// (i, m), so each unordered pair contributes two events of angle c 2^{i+m}.
void append_quadratic_phase_events(std::vector<GateEvent>& events, int n_q,
                                   double c) {
  const double big_n = static_cast<double>(std::size_t{1} << n_q);
  for (int i = 0; i < n_q; ++i) {
    const double four_i = static_cast<double>(std::size_t{1} << (2 * i));
    const double two_i = static_cast<double>(std::size_t{1} << i);
    events.push_back({GateKind::phase_shift, i, -1,
                      c * (four_i - big_n * two_i)});
  }
  for (int i = 0; i < n_q; ++i)
    for (int m = 0; m < n_q; ++m) {
      if (i == m) continue;
      const double two_im = static_cast<double>(std::size_t{1} << (i + m));
      events.push_back({GateKind::controlled_phase, i, m, c * two_im});
    }
  events.push_back(
      {GateKind::global_phase, -1, -1, c * big_n * big_n / 4.0});
}

}  // namespace

GateSchedule build_schedule(const MapParams& params) {
  GateSchedule sched;
  sched.n_q = params.n_q;
  auto& ev = sched.events;

  // momentum -> angle
  append_qft_events(ev, params.n_q, +1);
  sched.marker_index = ev.size();
  ev.push_back({GateKind::impurity_marker, -1, -1, 0.0});

  // kick phase exp(i k (theta - pi)^2 / 2) with theta - pi = T (l - N/2)
  const double c_kick = params.k_strength * params.t_kick * params.t_kick / 2.0;
  append_quadratic_phase_events(ev, params.n_q, c_kick);

  // angle -> momentum
  append_qft_events(ev, params.n_q, -1);

  // kinetic phase exp(-i T n^2 / 2) with n = j - N/2
  append_quadratic_phase_events(ev, params.n_q, -params.t_kick / 2.0);

  for (const auto& e : ev) {
    switch (e.kind) {
      case GateKind::hadamard:
        ++sched.hadamard_count;
        break;
      case GateKind::phase_shift:
        ++sched.phase_count;
        break;
      case GateKind::controlled_phase:
        ++sched.cp_count;
        break;
      default:
        break;
    }
  }
  return sched;
}

std::size_t apply_event(StateVector& state, const GateEvent& ev) {
  switch (ev.kind) {
    case GateKind::hadamard:
      return apply_hadamard(state, ev.q1);
    case GateKind::phase_shift:
      return apply_phase(state, ev.q1, ev.angle);
    case GateKind::controlled_phase:
      return apply_controlled_phase(state, ev.q1, ev.q2, ev.angle);
    case GateKind::bit_reversal:
      bit_reversal_permute(state);
      return state.dim();
    case GateKind::global_phase:
      kernels::masked_scale(state.amps.data(), state.dim(), 0, 0,
                            std::polar(1.0, ev.angle));
      return state.dim();
    case GateKind::impurity_marker:
      return 0;
  }
  return 0;
}

std::string GateSchedule::trace_json_lines() const {
  std::string out;
  char buf[160];
  for (const auto& e : events) {
    switch (e.kind) {
      case GateKind::hadamard:
        std::snprintf(buf, sizeof buf, "{\"kind\":\"H\",\"t\":[%d]}\n", e.q1);
        break;
      case GateKind::phase_shift:
        std::snprintf(buf, sizeof buf,
                      "{\"kind\":\"P\",\"t\":[%d],\"phi\":%.17g}\n", e.q1,
                      e.angle);
        break;
      case GateKind::controlled_phase:
        std::snprintf(buf, sizeof buf,
                      "{\"kind\":\"CP\",\"t\":[%d,%d],\"phi\":%.17g}\n", e.q1,
                      e.q2, e.angle);
        break;
      case GateKind::bit_reversal:
        std::snprintf(buf, sizeof buf, "{\"kind\":\"BITREV\"}\n");
        break;
      case GateKind::global_phase:
        std::snprintf(buf, sizeof buf, "{\"kind\":\"GPHASE\",\"phi\":%.17g}\n",
                      e.angle);
        break;
      case GateKind::impurity_marker:
        std::snprintf(buf, sizeof buf, "{\"kind\":\"MARKER\"}\n");
        break;
    }
    out += buf;
  }
  return out;
}

}  // namespace sawsim::gates
