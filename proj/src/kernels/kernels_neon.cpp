// NEON variants (aarch64). One float64x2_t holds a single complex double
// [re im]; loops are unrolled two complexes per iteration where the access
// pattern allows it.

#include <arm_neon.h>

#include "kernel_table.hpp"

namespace sawsim::kernels::detail {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

inline float64x2_t cmul(float64x2_t a, float64x2_t b) {
  // (ar br - ai bi, ar bi + ai br)
  const float64x2_t ar = vdupq_laneq_f64(a, 0);
  const float64x2_t ai = vdupq_laneq_f64(a, 1);
  const float64x2_t b_sw = vextq_f64(b, b, 1);  // [bi br]
  float64x2_t res = vmulq_f64(ar, b);
  const float64x2_t sign = {-1.0, 1.0};
  return vfmaq_f64(res, vmulq_f64(ai, sign), b_sw);
}

void pointwise_multiply_neon(cplx* a, const cplx* w, std::size_t n) {
  double* pa = reinterpret_cast<double*>(a);
  const double* pw = reinterpret_cast<const double*>(w);
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t va = vld1q_f64(pa + 2 * i);
    const float64x2_t vw = vld1q_f64(pw + 2 * i);
    vst1q_f64(pa + 2 * i, cmul(va, vw));
  }
}

void masked_scale_neon(cplx* a, std::size_t n, std::uint64_t mask,
                       std::uint64_t match, cplx s) {
  double sd[2] = {s.real(), s.imag()};
  const float64x2_t vs = vld1q_f64(sd);
  double* pa = reinterpret_cast<double*>(a);
  for (std::size_t j = 0; j < n; ++j) {
    if ((j & mask) != match) continue;
    vst1q_f64(pa + 2 * j, cmul(vld1q_f64(pa + 2 * j), vs));
  }
}

void hadamard_pairs_neon(cplx* a, std::size_t n, unsigned q) {
  double* p = reinterpret_cast<double*>(a);
  const float64x2_t c = vdupq_n_f64(kInvSqrt2);
  const std::size_t half = std::size_t{1} << q;
  for (std::size_t base = 0; base < n; base += 2 * half) {
    for (std::size_t i = base; i < base + half; ++i) {
      const float64x2_t x = vld1q_f64(p + 2 * i);
      const float64x2_t y = vld1q_f64(p + 2 * (i + half));
      vst1q_f64(p + 2 * i, vmulq_f64(vaddq_f64(x, y), c));
      vst1q_f64(p + 2 * (i + half), vmulq_f64(vsubq_f64(x, y), c));
    }
  }
}

void xx_mix_pairs_neon(cplx* a, std::size_t n, unsigned q1, unsigned q2,
                       double cos_t, double sin_t) {
  const std::size_t hi = std::size_t{1} << (q1 > q2 ? q1 : q2);
  const std::size_t mask = (std::size_t{1} << q1) | (std::size_t{1} << q2);
  double* p = reinterpret_cast<double*>(a);
  const float64x2_t c = vdupq_n_f64(cos_t);
  const float64x2_t sv = {sin_t, -sin_t};
  for (std::size_t j = 0; j < n; ++j) {
    if (j & hi) continue;
    const std::size_t pi = j ^ mask;
    const float64x2_t x = vld1q_f64(p + 2 * j);
    const float64x2_t y = vld1q_f64(p + 2 * pi);
    const float64x2_t x_sw = vextq_f64(x, x, 1);
    const float64x2_t y_sw = vextq_f64(y, y, 1);
    vst1q_f64(p + 2 * j, vfmaq_f64(vmulq_f64(y_sw, sv), x, c));
    vst1q_f64(p + 2 * pi, vfmaq_f64(vmulq_f64(x_sw, sv), y, c));
  }
}

cplx dot_conjugated_neon(const cplx* a, const cplx* b, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  float64x2_t racc = vdupq_n_f64(0.0);
  float64x2_t macc = vdupq_n_f64(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t va = vld1q_f64(pa + 2 * i);
    const float64x2_t vb = vld1q_f64(pb + 2 * i);
    racc = vfmaq_f64(racc, va, vb);                  // [ar br, ai bi]
    macc = vfmaq_f64(macc, vextq_f64(va, va, 1), vb);  // [ai br, ar bi]
  }
  const double re = vgetq_lane_f64(racc, 0) + vgetq_lane_f64(racc, 1);
  const double im = vgetq_lane_f64(macc, 1) - vgetq_lane_f64(macc, 0);
  return {re, im};
}

double squared_norm_neon(const cplx* a, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  float64x2_t acc = vdupq_n_f64(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t v = vld1q_f64(pa + 2 * i);
    acc = vfmaq_f64(acc, v, v);
  }
  return vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
}

const KernelTable neon = {
    Isa::neon,           &pointwise_multiply_neon, &masked_scale_neon,
    &hadamard_pairs_neon, &xx_mix_pairs_neon,      &dot_conjugated_neon,
    &squared_norm_neon,
};

}  // namespace

const KernelTable* neon_table() { return &neon; }

}  // namespace sawsim::kernels::detail
