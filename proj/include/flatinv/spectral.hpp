#pragma once

#include <memory>
#include <span>
#include <vector>

#include "flatinv/field.hpp"

namespace flatinv {

/// Discrete transverse frequencies of an n x n lattice. Mode m = k2 * n + k1
/// with k1, k2 in FFT storage order; the signed wavenumber of index k is k for
/// k < n/2 and k - n otherwise, so Omega = 2*pi*k_signed / (n*h).
class ModeLattice {
 public:
  ModeLattice() = default;
  explicit ModeLattice(const Grid3D& grid);

  std::size_t n() const { return n_; }
  std::size_t size() const { return n_ * n_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }

  static long signed_index(std::size_t k, std::size_t n) {
    return k < n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
  }
  long k1(std::size_t m) const { return signed_index(m % n_, n_); }
  long k2(std::size_t m) const { return signed_index(m / n_, n_); }
  double omega1(std::size_t m) const { return omega1_[m]; }
  double omega2(std::size_t m) const { return omega2_[m]; }
  double magnitude(std::size_t m) const;
  std::size_t mode(std::size_t k1_index, std::size_t k2_index) const { return k2_index * n_ + k1_index; }
  /// The mode carrying (-Omega1, -Omega2); the Nyquist index maps to itself.
  std::size_t mirror(std::size_t m) const;
  /// Mode spacing in Omega1, Omega2.
  double d_omega1() const;
  double d_omega2() const;

 private:
  std::size_t n_ = 0;
  double hx_ = 0.0;
  double hy_ = 0.0;
  std::vector<double> omega1_;
  std::vector<double> omega2_;
};

/// Slab transforms approximating the continuous pair
///   A(Omega) = integral a(x,y) exp(+i(Omega1 x + Omega2 y)) dx dy
///   a(x,y)   = (2 pi)^-2 integral A(Omega) exp(-i(Omega1 x + Omega2 y)) dOmega
/// on the periodic lattice of a grid. Plans are shared read-only, so distinct
/// slabs can be transformed concurrently.
class SlabTransform {
 public:
  explicit SlabTransform(const Grid3D& grid);
  ~SlabTransform();
  SlabTransform(const SlabTransform&) = delete;
  SlabTransform& operator=(const SlabTransform&) = delete;
  SlabTransform(SlabTransform&&) noexcept;
  SlabTransform& operator=(SlabTransform&&) noexcept;

  const ModeLattice& lattice() const;

  /// `in` and `out` have n*n entries and may alias.
  void forward(std::span<const cplx> in, std::span<cplx> out) const;
  void inverse(std::span<const cplx> in, std::span<cplx> out) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SpectralField forward_xy(const ComplexField& field);
ComplexField inverse_xy(const SpectralField& spec);

SpectralField forward_xy(const SlabTransform& transform, const ComplexField& field);
ComplexField inverse_xy(const SlabTransform& transform, const SpectralField& spec);

}  // namespace flatinv
