#include "sawsim/core.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "sawsim/kernels.hpp"

namespace sawsim {

MapParams MapParams::make(int n_q, double cap_k) {
  if (n_q < 2 || n_q > 62) throw domain_error("n_q must be in [2, 62]");
  MapParams p;
  p.n_q = n_q;
  p.big_n = std::size_t{1} << n_q;
  p.cap_k = cap_k;
  p.t_kick = 2.0 * std::numbers::pi / static_cast<double>(p.big_n);
  p.k_strength = cap_k / p.t_kick;
  return p;
}

std::size_t MapParams::index_of_momentum(long n) const {
  const long half = static_cast<long>(big_n / 2);
  if (n < -half || n >= half)
    throw domain_error("momentum " + std::to_string(n) + " outside [-N/2, N/2)");
  return static_cast<std::size_t>(n + half);
}

double MapParams::theta_of_index(std::size_t l) const {
  return 2.0 * std::numbers::pi * static_cast<double>(l) /
         static_cast<double>(big_n);
}

int StateVector::qubits() const {
  return std::countr_zero(amps.size());
}

double StateVector::norm() const {
  return std::sqrt(kernels::squared_norm(amps.data(), amps.size()));
}

void StateVector::normalize() {
  const double n = norm();
  if (n == 0.0) throw contract_error("cannot normalize the zero vector");
  const double inv = 1.0 / n;
  for (auto& a : amps) a *= inv;
}

cplx inner_product(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim())
    throw contract_error("inner_product: dimension mismatch");
  if (a.basis != b.basis)
    throw contract_error("inner_product: basis mismatch");
  return kernels::dot_conjugated(a.amps.data(), b.amps.data(), a.dim());
}

StateVector basis_state(const MapParams& params, long n) {
  StateVector s;
  s.amps.assign(params.big_n, cplx(0.0, 0.0));
  s.amps[params.index_of_momentum(n)] = cplx(1.0, 0.0);
  s.basis = Basis::momentum;
  return s;
}

StateVector random_state(const MapParams& params, std::uint64_t seed) {
  Rng rng(seed);
  StateVector s;
  s.amps.resize(params.big_n);
  for (auto& a : s.amps) {
    // Box-Muller; complex gaussian entries make the state Haar-typical.
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    a = cplx(r * std::cos(2.0 * std::numbers::pi * u2),
             r * std::sin(2.0 * std::numbers::pi * u2));
  }
  s.normalize();
  return s;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t SeedPlan::task_seed(std::uint64_t n_q, std::uint64_t eps_index,
                                  std::uint64_t realization_index) const {
  std::uint64_t s = master_seed;
  std::uint64_t h = splitmix64(s);
  s ^= n_q;
  h ^= splitmix64(s);
  s ^= eps_index;
  h ^= splitmix64(s);
  s ^= realization_index;
  h ^= splitmix64(s);
  return h;
}

}  // namespace sawsim
