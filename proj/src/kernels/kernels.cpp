#include "sawsim/kernels.hpp"

#include <atomic>
#include <bit>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <string>

#include "kernel_table.hpp"

namespace sawsim::kernels {

namespace ref {

void pointwise_multiply(cplx* a, const cplx* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] *= w[i];
}

void masked_scale(cplx* a, std::size_t n, std::uint64_t mask,
                  std::uint64_t match, cplx s) {
  for (std::size_t j = 0; j < n; ++j)
    if ((j & mask) == match) a[j] *= s;
}

void hadamard_pairs(cplx* a, std::size_t n, unsigned q) {
  const double inv_sqrt2 = 0.70710678118654752440;
  const std::size_t half = std::size_t{1} << q;
  for (std::size_t base = 0; base < n; base += 2 * half) {
    for (std::size_t i = base; i < base + half; ++i) {
      const cplx x = a[i];
      const cplx y = a[i + half];
      a[i] = (x + y) * inv_sqrt2;
      a[i + half] = (x - y) * inv_sqrt2;
    }
  }
}

void xx_mix_pairs(cplx* a, std::size_t n, unsigned q1, unsigned q2,
                  double cos_t, double sin_t) {
  const std::size_t hi = std::size_t{1} << (q1 > q2 ? q1 : q2);
  const std::size_t mask = (std::size_t{1} << q1) | (std::size_t{1} << q2);
  for (std::size_t j = 0; j < n; ++j) {
    if (j & hi) continue;  // canonical member has the high pair bit clear
    const std::size_t p = j ^ mask;
    const cplx x = a[j];
    const cplx y = a[p];
    a[j] = cplx(cos_t * x.real() + sin_t * y.imag(),
                cos_t * x.imag() - sin_t * y.real());
    a[p] = cplx(cos_t * y.real() + sin_t * x.imag(),
                cos_t * y.imag() - sin_t * x.real());
  }
}

cplx dot_conjugated(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

double squared_norm(const cplx* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  return s;
}

}  // namespace ref

namespace {

using detail::KernelTable;

const KernelTable scalar_table = {
    Isa::scalar,          &ref::pointwise_multiply, &ref::masked_scale,
    &ref::hadamard_pairs, &ref::xx_mix_pairs,       &ref::dot_conjugated,
    &ref::squared_norm,
};

const KernelTable* pick_table() {
#if defined(SAWSIM_AVX2_TU)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return detail::avx2_table();
#endif
#if defined(SAWSIM_NEON_TU)
  return detail::neon_table();
#endif
  return &scalar_table;
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &scalar_table;
    case Isa::avx2:
#if defined(SAWSIM_AVX2_TU)
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return detail::avx2_table();
#endif
      return nullptr;
    case Isa::neon:
#if defined(SAWSIM_NEON_TU)
      return detail::neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::atomic<const KernelTable*> g_table{nullptr};

const KernelTable& table() {
  const KernelTable* t = g_table.load(std::memory_order_acquire);
  if (t) return *t;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  t = g_table.load(std::memory_order_acquire);
  if (t) return *t;
  const char* env = std::getenv("SAWSIM_ISA");
  if (env) {
    std::string want(env);
    const KernelTable* forced = nullptr;
    if (want == "scalar") forced = table_for(Isa::scalar);
    if (want == "avx2") forced = table_for(Isa::avx2);
    if (want == "neon") forced = table_for(Isa::neon);
    if (forced) {
      g_table.store(forced, std::memory_order_release);
      return *forced;
    }
  }
  t = pick_table();
  g_table.store(t, std::memory_order_release);
  return *t;
}

}  // namespace

Isa active_isa() { return table().isa; }

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "?";
}

void force_isa(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (!t)
    throw std::invalid_argument(std::string("kernel path unavailable: ") +
                                isa_name(isa));
  g_table.store(t, std::memory_order_release);
}

void pointwise_multiply(cplx* a, const cplx* w, std::size_t n) {
  table().pointwise_multiply(a, w, n);
}
void masked_scale(cplx* a, std::size_t n, std::uint64_t mask,
                  std::uint64_t match, cplx s) {
  table().masked_scale(a, n, mask, match, s);
}
void hadamard_pairs(cplx* a, std::size_t n, unsigned q) {
  table().hadamard_pairs(a, n, q);
}
void xx_mix_pairs(cplx* a, std::size_t n, unsigned q1, unsigned q2,
                  double cos_t, double sin_t) {
  table().xx_mix_pairs(a, n, q1, q2, cos_t, sin_t);
}
cplx dot_conjugated(const cplx* a, const cplx* b, std::size_t n) {
  return table().dot_conjugated(a, b, n);
}
double squared_norm(const cplx* a, std::size_t n) {
  return table().squared_norm(a, n);
}

}  // namespace sawsim::kernels
