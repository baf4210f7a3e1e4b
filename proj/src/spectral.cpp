#include "flatinv/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace flatinv {

ModeLattice::ModeLattice(const Grid3D& grid) : n_(grid.n()), hx_(grid.hx()), hy_(grid.hy()) {
  omega1_.resize(size());
  omega2_.resize(size());
  const double s1 = 2.0 * std::numbers::pi / (static_cast<double>(n_) * hx_);
  const double s2 = 2.0 * std::numbers::pi / (static_cast<double>(n_) * hy_);
  for (std::size_t m = 0; m < size(); ++m) {
    omega1_[m] = s1 * static_cast<double>(k1(m));
    omega2_[m] = s2 * static_cast<double>(k2(m));
  }
}

double ModeLattice::magnitude(std::size_t m) const { return std::hypot(omega1_[m], omega2_[m]); }

std::size_t ModeLattice::mirror(std::size_t m) const {
  const std::size_t a = m % n_;
  const std::size_t b = m / n_;
  return mode((n_ - a) % n_, (n_ - b) % n_);
}

double ModeLattice::d_omega1() const { return 2.0 * std::numbers::pi / (static_cast<double>(n_) * hx_); }
double ModeLattice::d_omega2() const { return 2.0 * std::numbers::pi / (static_cast<double>(n_) * hy_); }

namespace {
// FFTW's planner is not re-entrant; execution of existing plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct SlabTransform::Impl {
  ModeLattice lattice;
  std::size_t n = 0;
  fftw_plan plus = nullptr;   // exp(+i ...)
  fftw_plan minus = nullptr;  // exp(-i ...)
  std::vector<cplx> forward_factor;  // hx*hy*exp(+i Omega.r_min)
  std::vector<cplx> inverse_factor;  // exp(-i Omega.r_min) / (n^2 hx hy)

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (plus != nullptr) fftw_destroy_plan(plus);
    if (minus != nullptr) fftw_destroy_plan(minus);
  }
};

SlabTransform::SlabTransform(const Grid3D& grid) : impl_(std::make_unique<Impl>()) {
  Impl& s = *impl_;
  s.lattice = ModeLattice(grid);
  s.n = grid.n();
  const int n = static_cast<int>(s.n);
  {
    std::lock_guard lock(planner_mutex());
    auto* scratch = fftw_alloc_complex(s.n * s.n);
    // rank-2 transform over (y, x) with x contiguous
    s.plus = fftw_plan_dft_2d(n, n, scratch, scratch, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    s.minus = fftw_plan_dft_2d(n, n, scratch, scratch, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
  }
  if (s.plus == nullptr || s.minus == nullptr) throw NumericalError("FFTW plan creation failed");

  const double area = grid.hx() * grid.hy();
  const double inv_scale = 1.0 / (static_cast<double>(s.n * s.n) * area);
  s.forward_factor.resize(s.n * s.n);
  s.inverse_factor.resize(s.n * s.n);
  for (std::size_t m = 0; m < s.n * s.n; ++m) {
    const double phase = s.lattice.omega1(m) * grid.x_min() + s.lattice.omega2(m) * grid.y_min();
    const cplx e = std::polar(1.0, phase);
    s.forward_factor[m] = area * e;
    s.inverse_factor[m] = inv_scale * std::conj(e);
  }
}

SlabTransform::~SlabTransform() = default;
SlabTransform::SlabTransform(SlabTransform&&) noexcept = default;
SlabTransform& SlabTransform::operator=(SlabTransform&&) noexcept = default;

const ModeLattice& SlabTransform::lattice() const { return impl_->lattice; }

void SlabTransform::forward(std::span<const cplx> in, std::span<cplx> out) const {
  const Impl& s = *impl_;
  if (in.data() != out.data()) std::copy(in.begin(), in.end(), out.begin());
  auto* p = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(s.plus, p, p);
  for (std::size_t m = 0; m < out.size(); ++m) out[m] *= s.forward_factor[m];
}

void SlabTransform::inverse(std::span<const cplx> in, std::span<cplx> out) const {
  const Impl& s = *impl_;
  for (std::size_t m = 0; m < in.size(); ++m) out[m] = in[m] * s.inverse_factor[m];
  auto* p = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(s.minus, p, p);
}

SpectralField forward_xy(const SlabTransform& transform, const ComplexField& field) {
  SpectralField spec(field.grid);
  for (std::size_t iz = 0; iz < field.grid.mz(); ++iz) transform.forward(field.slab(iz), spec.slab(iz));
  return spec;
}

ComplexField inverse_xy(const SlabTransform& transform, const SpectralField& spec) {
  ComplexField field(spec.grid);
  for (std::size_t iz = 0; iz < spec.grid.mz(); ++iz) transform.inverse(spec.slab(iz), field.slab(iz));
  return field;
}

SpectralField forward_xy(const ComplexField& field) { return forward_xy(SlabTransform(field.grid), field); }

ComplexField inverse_xy(const SpectralField& spec) { return inverse_xy(SlabTransform(spec.grid), spec); }

}  // namespace flatinv
