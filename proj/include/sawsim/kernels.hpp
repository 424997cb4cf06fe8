#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>

// Data-parallel inner loops over register amplitudes. Every kernel has a
// scalar reference implementation (kernels::ref) and, where the platform
// supports it, a SIMD variant selected once at runtime. The dispatched and
// reference paths are equivalence-tested against each other; reductions may
// differ in summation order, elementwise kernels only in the last ulp (FMA).

namespace sawsim::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2, neon };

/// Instruction set the dispatcher resolved to (env SAWSIM_ISA overrides).
Isa active_isa();
const char* isa_name(Isa isa);

/// Pin the dispatch for tests. Throws std::invalid_argument if the requested
/// path is not available on this machine/build.
void force_isa(Isa isa);

// a[i] *= w[i]
void pointwise_multiply(cplx* a, const cplx* w, std::size_t n);

// a[j] *= s for every j with (j & mask) == match
void masked_scale(cplx* a, std::size_t n, std::uint64_t mask,
                  std::uint64_t match, cplx s);

// Butterfly on bit q: pairs (j, j | 2^q) with bit q of j clear become
// ((x+y)/sqrt2, (x-y)/sqrt2).
void hadamard_pairs(cplx* a, std::size_t n, unsigned q);

// Two-level rotation exp(-i t XX) on the pair bits (q1, q2): amplitudes
// (x, y) at (j, j ^ (2^q1 | 2^q2)) become (c x - i s y, c y - i s x),
// c = cos t, s = sin t.
void xx_mix_pairs(cplx* a, std::size_t n, unsigned q1, unsigned q2,
                  double cos_t, double sin_t);

// sum_i conj(a[i]) * b[i]
cplx dot_conjugated(const cplx* a, const cplx* b, std::size_t n);

// sum_i |a[i]|^2
double squared_norm(const cplx* a, std::size_t n);

namespace ref {
void pointwise_multiply(cplx* a, const cplx* w, std::size_t n);
void masked_scale(cplx* a, std::size_t n, std::uint64_t mask,
                  std::uint64_t match, cplx s);
void hadamard_pairs(cplx* a, std::size_t n, unsigned q);
void xx_mix_pairs(cplx* a, std::size_t n, unsigned q1, unsigned q2,
                  double cos_t, double sin_t);
cplx dot_conjugated(const cplx* a, const cplx* b, std::size_t n);
double squared_norm(const cplx* a, std::size_t n);
}  // namespace ref

}  // namespace sawsim::kernels
