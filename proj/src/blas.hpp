#pragma once

#include <Eigen/Dense>
#include <complex>

// Thin wrappers over OpenBLAS zgemm for the dense N^3 products (residual
// certification, overlap matrices). BLAS threading is pinned to one thread;
// parallelism lives at the task level and results stay reproducible.

extern "C" {
void cblas_zgemm(int order, int trans_a, int trans_b, int m, int n, int k,
                 const void* alpha, const void* a, int lda, const void* b,
                 int ldb, const void* beta, void* c, int ldc);
void openblas_set_num_threads(int n);
}

namespace sawsim::detail {

inline void pin_blas_threads() {
  static const bool done = [] {
    openblas_set_num_threads(1);
    return true;
  }();
  (void)done;
}

enum { kColMajor = 102, kNoTrans = 111, kConjTrans = 113 };

// A^H * B
inline Eigen::MatrixXcd adjoint_product(const Eigen::MatrixXcd& a,
                                        const Eigen::MatrixXcd& b) {
  pin_blas_threads();
  const int m = static_cast<int>(a.cols());
  const int n = static_cast<int>(b.cols());
  const int k = static_cast<int>(a.rows());
  Eigen::MatrixXcd c(m, n);
  const std::complex<double> one(1.0, 0.0), zero(0.0, 0.0);
  cblas_zgemm(kColMajor, kConjTrans, kNoTrans, m, n, k, &one, a.data(),
              static_cast<int>(a.rows()), b.data(),
              static_cast<int>(b.rows()), &zero, c.data(), m);
  return c;
}

// A * B
inline Eigen::MatrixXcd product(const Eigen::MatrixXcd& a,
                                const Eigen::MatrixXcd& b) {
  pin_blas_threads();
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(b.cols());
  const int k = static_cast<int>(a.cols());
  Eigen::MatrixXcd c(m, n);
  const std::complex<double> one(1.0, 0.0), zero(0.0, 0.0);
  cblas_zgemm(kColMajor, kNoTrans, kNoTrans, m, n, k, &one, a.data(), m,
              b.data(), k, &zero, c.data(), m);
  return c;
}

}  // namespace sawsim::detail
