// AVX2/FMA variants. Layout: one __m256d holds two complex doubles
// [re0 im0 re1 im1]; all loads/stores unaligned. Only reached after the
// dispatcher verified cpu support, but the TU is compiled with -mavx2 -mfma,
// so nothing here may run before dispatch.

#include <immintrin.h>

#include "kernel_table.hpp"

namespace sawsim::kernels::detail {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// [x0 y0 x1 y1] * (sr + i si) for complex lanes (x, y)
inline __m256d cmul_const(__m256d a, __m256d sr, __m256d si) {
  const __m256d a_sw = _mm256_permute_pd(a, 0x5);  // [y0 x0 y1 x1]
  return _mm256_fmaddsub_pd(a, sr, _mm256_mul_pd(a_sw, si));
}

void pointwise_multiply_avx2(cplx* a, const cplx* w, std::size_t n) {
  double* pa = reinterpret_cast<double*>(a);
  const double* pw = reinterpret_cast<const double*>(w);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vw = _mm256_loadu_pd(pw + 2 * i);
    const __m256d wr = _mm256_movedup_pd(vw);         // [wr0 wr0 wr1 wr1]
    const __m256d wi = _mm256_permute_pd(vw, 0xF);    // [wi0 wi0 wi1 wi1]
    const __m256d a_sw = _mm256_permute_pd(va, 0x5);  // [ai0 ar0 ai1 ar1]
    const __m256d res =
        _mm256_fmaddsub_pd(va, wr, _mm256_mul_pd(a_sw, wi));
    _mm256_storeu_pd(pa + 2 * i, res);
  }
  for (; i < n; ++i) a[i] *= w[i];
}

inline void scale_run(double* p, std::size_t n_cplx, __m256d sr, __m256d si,
                      cplx s) {
  std::size_t i = 0;
  for (; i + 2 <= n_cplx; i += 2) {
    const __m256d v = _mm256_loadu_pd(p + 2 * i);
    _mm256_storeu_pd(p + 2 * i, cmul_const(v, sr, si));
  }
  for (; i < n_cplx; ++i) {
    cplx* c = reinterpret_cast<cplx*>(p) + i;
    *c *= s;
  }
}

void masked_scale_avx2(cplx* a, std::size_t n, std::uint64_t mask,
                       std::uint64_t match, cplx s) {
  const __m256d sr = _mm256_set1_pd(s.real());
  const __m256d si = _mm256_set1_pd(s.imag());
  if (mask == 0) {
    if (match == 0) scale_run(reinterpret_cast<double*>(a), n, sr, si, s);
    return;
  }
  const unsigned low = static_cast<unsigned>(__builtin_ctzll(mask));
  const std::size_t run = std::size_t{1} << low;
  if (run >= 2) {
    for (std::size_t base = 0; base < n; base += run)
      if ((base & mask) == match)
        scale_run(reinterpret_cast<double*>(a + base), run, sr, si, s);
  } else {
    for (std::size_t j = 0; j < n; ++j)
      if ((j & mask) == match) a[j] *= s;
  }
}

void hadamard_pairs_avx2(cplx* a, std::size_t n, unsigned q) {
  double* p = reinterpret_cast<double*>(a);
  const __m256d c = _mm256_set1_pd(kInvSqrt2);
  if (q == 0) {
    // pair sits inside one vector: [x y] -> [(x+y) (x-y)]/sqrt2
    for (std::size_t i = 0; i + 2 <= n; i += 2) {
      const __m256d v = _mm256_loadu_pd(p + 2 * i);
      const __m256d sw = _mm256_permute2f128_pd(v, v, 0x01);
      const __m256d sum = _mm256_add_pd(v, sw);
      const __m256d dif = _mm256_sub_pd(v, sw);
      const __m256d dif_sw = _mm256_permute2f128_pd(dif, dif, 0x01);
      const __m256d res = _mm256_blend_pd(sum, dif_sw, 0xC);
      _mm256_storeu_pd(p + 2 * i, _mm256_mul_pd(res, c));
    }
    if (n == 1) return;  // unreachable for power-of-two registers
    return;
  }
  const std::size_t half = std::size_t{1} << q;
  for (std::size_t base = 0; base < n; base += 2 * half) {
    for (std::size_t i = base; i < base + half; i += 2) {
      const __m256d x = _mm256_loadu_pd(p + 2 * i);
      const __m256d y = _mm256_loadu_pd(p + 2 * (i + half));
      _mm256_storeu_pd(p + 2 * i, _mm256_mul_pd(_mm256_add_pd(x, y), c));
      _mm256_storeu_pd(p + 2 * (i + half),
                       _mm256_mul_pd(_mm256_sub_pd(x, y), c));
    }
  }
}

void xx_mix_pairs_avx2(cplx* a, std::size_t n, unsigned q1, unsigned q2,
                       double cos_t, double sin_t) {
  const unsigned lo = q1 < q2 ? q1 : q2;
  const unsigned hi = q1 < q2 ? q2 : q1;
  const std::size_t hi_bit = std::size_t{1} << hi;
  const std::size_t mask = (std::size_t{1} << q1) | (std::size_t{1} << q2);
  if (lo == 0) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j & hi_bit) continue;
      const std::size_t pidx = j ^ mask;
      const cplx x = a[j];
      const cplx y = a[pidx];
      a[j] = cplx(cos_t * x.real() + sin_t * y.imag(),
                  cos_t * x.imag() - sin_t * y.real());
      a[pidx] = cplx(cos_t * y.real() + sin_t * x.imag(),
                     cos_t * y.imag() - sin_t * x.real());
    }
    return;
  }
  double* p = reinterpret_cast<double*>(a);
  const std::size_t run = std::size_t{1} << lo;
  const __m256d c = _mm256_set1_pd(cos_t);
  const __m256d sv = _mm256_setr_pd(sin_t, -sin_t, sin_t, -sin_t);
  for (std::size_t base = 0; base < n; base += run) {
    if (base & hi_bit) continue;
    const std::size_t pb = base ^ mask;
    for (std::size_t i = 0; i + 2 <= run; i += 2) {
      double* px = p + 2 * (base + i);
      double* py = p + 2 * (pb + i);
      const __m256d x = _mm256_loadu_pd(px);
      const __m256d y = _mm256_loadu_pd(py);
      const __m256d y_sw = _mm256_permute_pd(y, 0x5);
      const __m256d x_sw = _mm256_permute_pd(x, 0x5);
      _mm256_storeu_pd(px, _mm256_fmadd_pd(x, c, _mm256_mul_pd(y_sw, sv)));
      _mm256_storeu_pd(py, _mm256_fmadd_pd(y, c, _mm256_mul_pd(x_sw, sv)));
    }
  }
}

cplx dot_conjugated_avx2(const cplx* a, const cplx* b, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  __m256d racc = _mm256_setzero_pd();
  __m256d macc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    racc = _mm256_fmadd_pd(va, vb, racc);  // lanes: ar br, ai bi
    const __m256d a_sw = _mm256_permute_pd(va, 0x5);
    macc = _mm256_fmadd_pd(a_sw, vb, macc);  // lanes: ai br, ar bi
  }
  alignas(32) double r[4], m[4];
  _mm256_store_pd(r, racc);
  _mm256_store_pd(m, macc);
  double re = r[0] + r[1] + r[2] + r[3];
  double im = (m[1] + m[3]) - (m[0] + m[2]);
  for (; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

double squared_norm_avx2(const cplx* a, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_loadu_pd(pa + 2 * i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  alignas(32) double t[4];
  _mm256_store_pd(t, acc);
  double s = t[0] + t[1] + t[2] + t[3];
  for (; i < n; ++i)
    s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  return s;
}

const KernelTable avx2 = {
    Isa::avx2,           &pointwise_multiply_avx2, &masked_scale_avx2,
    &hadamard_pairs_avx2, &xx_mix_pairs_avx2,      &dot_conjugated_avx2,
    &squared_norm_avx2,
};

}  // namespace

const KernelTable* avx2_table() { return &avx2; }

}  // namespace sawsim::kernels::detail
