#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flatinv/field.hpp"
#include "flatinv/medium.hpp"
#include "flatinv/spectral.hpp"

namespace flatinv {

/// Trapezoidal weights on a uniform axial grid; {1} for a single slab.
std::vector<double> trapezoid_weights(const Grid3D& grid);

/// Per-mode discretisation of  omega^2 * integral G(z - z', Omega) V(z') dz'
/// as dense class matrices, rows on the receiver grid, columns on the source
/// grid, entries omega^2 * mu_l * G(z_k - z'_l).
class KernelOperator {
 public:
  explicit KernelOperator(const GreenKernelTable& table);
  KernelOperator(const GreenKernelTable& table, std::span<const double> weights);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double omega() const { return omega_; }
  const Grid3D& receiver() const { return receiver_; }
  const Grid3D& source() const { return source_; }
  const ModeClasses& classes() const { return classes_; }
  /// Row-major rows x cols matrix of a mode class.
  std::span<const cplx> class_matrix(std::size_t cls) const {
    return {matrices_.data() + cls * rows_ * cols_, rows_ * cols_};
  }

  /// `v` lives on the source grid; the result on the receiver grid.
  SpectralField apply(const SpectralField& v) const;

 private:
  double omega_;
  Grid3D receiver_;
  Grid3D source_;
  ModeClasses classes_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<cplx> matrices_;
};

/// V~ = F_r[ xi * F_Omega^-1[ U~ ] ], slab by slab. Slabs where xi vanishes
/// are skipped and left at zero.
SpectralField contrast_source(const SpectralField& u, const RealField& xi, const SlabTransform& transform);

struct BornOptions {
  double tol = 1e-13;
  std::size_t max_iter = 2000;
  /// Consecutive residual increases that count as divergence.
  std::size_t divergence_window = 10;
};

struct ForwardResult {
  SpectralField u_nu;
  SpectralField w_spec;
  ComplexField w_field;
  std::size_t iterations = 0;
  std::vector<double> residual_history;  // ||U_n - U_{n-1}|| / ||U_0||
  bool converged = false;
};

/// Fixed-point iteration U_{n+1} = U_0 + K V~[U_n] on the scatterer grid,
/// stopped once ||U_nu - U_{nu-1}|| <= tol ||U_0||. Fills u_nu, iterations,
/// residual_history and converged; reaching max_iter leaves converged false.
/// Throws DivergenceError after `divergence_window` consecutive increases.
ForwardResult born_iterate(const SpectralField& u0, const KernelOperator& kernel_xx, const RealField& xi,
                           double omega, const SlabTransform& transform, const BornOptions& options = {});

/// One application of the fixed-point map, U_0 + K V~[u].
SpectralField born_map(const SpectralField& u0, const SpectralField& u, const KernelOperator& kernel_xx,
                       const RealField& xi, const SlabTransform& transform);

struct ScatteredData {
  SpectralField w_spec;
  ComplexField w_field;
};

/// W~ = K_xy V~ on the receiver grid and its inverse transform.
ScatteredData scattered_data(const SpectralField& v, const KernelOperator& kernel_xy, const SlabTransform& transform);
ScatteredData scattered_data(const SpectralField& u_nu, const RealField& xi, const KernelOperator& kernel_xy,
                             const SlabTransform& transform);

/// Born iteration followed by receiver-layer synthesis.
ForwardResult solve_forward(const SpectralField& u0, const KernelOperator& kernel_xx,
                            const KernelOperator& kernel_xy, const RealField& xi, double omega,
                            const SlabTransform& transform, const BornOptions& options = {});

/// Adds zero-mean complex Gaussian noise (independent real and imaginary
/// parts) scaled so that ||W_delta - W|| = delta ||W|| exactly. delta = 0
/// returns a bitwise copy. Deterministic in `seed`.
ComplexField add_noise(const ComplexField& w, double delta, std::uint64_t seed);

}  // namespace flatinv
