#pragma once

#include <span>
#include <vector>

#include "flatinv/forward.hpp"
#include "flatinv/regularize.hpp"

namespace flatinv {

struct ModeSolveStats {
  std::vector<std::size_t> ranks;  // per mode; effective rank for Tikhonov
  std::size_t failed_modes = 0;
  std::size_t zero_rank_modes = 0;
  double sigma_ref = 0.0;
  /// Per-mode residual target of the discrepancy policy; 0 for fixed policies.
  double mode_target = 0.0;
  /// Modes where the fixed-threshold cap kept the residual above the target.
  std::size_t capped_modes = 0;
};

struct ModeSolveResult {
  SpectralField v_spec;  // on the scatterer grid
  ModeSolveStats stats;
  /// Singular values of each mode class, for diagnostics.
  std::vector<VectorR> class_sigma;
};

/// Regularized solution of the per-mode first-kind equations
///   omega^2 * integral G~(z - z') V~(z') dz' = W~(z)
/// for every transverse mode. Modes sharing a class share one SVD. A mode
/// whose solve fails yields a zero column and is counted, other modes proceed.
///
/// The discrepancy policy spreads the relative noise level evenly over the
/// modes: target = factor * delta * ||W~|| / sqrt(n*n), and never retains
/// more components than the fixed threshold would.
ModeSolveResult solve_modes(const SpectralField& w_spec, const GreenKernelTable& kernel_xy,
                            const RegularizerConfig& reg);

/// U~ = U~0 + K_xx V~.
SpectralField recompute_internal_field(const SpectralField& v_spec, const SpectralField& u0_spec,
                                       const KernelOperator& kernel_xx);

struct XiEstimate {
  RealField xi;
  /// L2 norm of the discarded imaginary part over unmasked nodes.
  double imag_norm = 0.0;
  double masked_fraction = 0.0;
};

/// xi = Re(V / u) where |u| >= eps * max|u|, zero elsewhere.
XiEstimate extract_xi_single(const ComplexField& v, const ComplexField& u, double eps_div = 1e-3);

/// Pointwise least squares over frequencies for real xi:
/// xi = Re(sum conj(u) V) / sum |u|^2, masked where sum |u|^2 < eps^2 * max.
/// With a single frequency this coincides with extract_xi_single.
XiEstimate extract_xi_lsq(std::span<const ComplexField> v, std::span<const ComplexField> u, double eps_div = 1e-3);

struct FrequencyInversion {
  double omega = 0.0;
  ComplexField v;  // V(r, z') on the scatterer grid
  ComplexField u;  // u(r, z') on the scatterer grid
  XiEstimate xi;
  ModeSolveStats stats;
  std::vector<VectorR> class_sigma;
};

/// Per-frequency operators the inversion needs.
struct FrequencyContext {
  double omega = 0.0;
  const GreenKernelTable* kernel_xy = nullptr;
  const KernelOperator* kernel_xx = nullptr;
  const SpectralField* u0_spec = nullptr;
};

/// Regularized mode solves, internal-field recomputation and division for a
/// single frequency, starting from measured receiver-layer data.
FrequencyInversion invert_frequency(const ComplexField& w_field, const FrequencyContext& ctx,
                                    const SlabTransform& transform, const RegularizerConfig& reg,
                                    double eps_div = 1e-3);

}  // namespace flatinv
