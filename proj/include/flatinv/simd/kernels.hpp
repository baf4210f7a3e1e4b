#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

namespace flatinv::simd {

using cplx = std::complex<double>;

// Inner loops of the per-mode solvers and the pointwise r-space products.
// Every entry has a scalar reference implementation; wider variants must
// agree with it to rounding (see tests/unit/test_kernels.cpp).
struct KernelTable {
  std::string_view name;

  /// sum_i a[i] * b[i]
  cplx (*dot)(const cplx* a, const cplx* b, std::size_t n);
  /// sum_i conj(a[i]) * b[i]
  cplx (*dot_conj)(const cplx* a, const cplx* b, std::size_t n);
  /// y = A x, A row-major rows x cols
  void (*matvec)(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y);
  /// out[i] = r[i] * in[i]
  void (*scale_real)(const double* r, const cplx* in, cplx* out, std::size_t n);
  /// sum_i |x[i]|^2
  double (*sum_abs2)(const cplx* x, std::size_t n);
  /// sum_i r[i]^2
  double (*sum_sq)(const double* r, std::size_t n);
};

const KernelTable& scalar_kernels();

/// nullptr when the build or the running CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

/// Widest variant the CPU supports. Setting FLATINV_SIMD=scalar in the
/// environment pins the scalar table. Resolved once per process.
const KernelTable& active_kernels();

}  // namespace flatinv::simd
