#include "flatinv/simd/kernels.hpp"

namespace flatinv::simd {
namespace {

cplx dot_scalar(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
  }
  return {re, im};
}

cplx dot_conj_scalar(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

void matvec_scalar(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

void scale_real_scalar(const double* r, const cplx* in, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = {r[i] * in[i].real(), r[i] * in[i].imag()};
}

double sum_abs2_scalar(const cplx* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

double sum_sq_scalar(const double* r, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += r[i] * r[i];
  return s;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar",          dot_scalar,       dot_conj_scalar, matvec_scalar,
                                 scale_real_scalar, sum_abs2_scalar, sum_sq_scalar};
  return table;
}

}  // namespace flatinv::simd
