#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>

#include "flatinv/medium.hpp"

namespace flatinv {

using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;
using VectorR = Eigen::VectorXd;

/// Discretised first-kind equation of one transverse mode:
/// rows are receiver nodes (the data), columns scatterer nodes (the unknowns),
/// A(k, l) = omega^2 * mu_l * G~(z_k - z'_l, Omega_m).
struct ModeSystem {
  MatrixC a;
  VectorC b;
  std::size_t mode = 0;
  double omega = 0.0;
};

ModeSystem assemble_mode_system(const GreenKernelTable& kernel_xy, std::size_t mode, double omega,
                                std::span<const double> weights);

/// Thin SVD, singular values descending.
struct Decomposition {
  MatrixC u;
  VectorR sigma;
  MatrixC v;
};

Decomposition decompose(const MatrixC& a);

struct TsvdSolution {
  VectorC x;
  std::size_t rank = 0;
  VectorR sigma;
};

/// Number of singular values >= threshold (absolute).
std::size_t rank_above(const VectorR& sigma, double threshold);

/// Minimal-norm least-squares solution restricted to the leading `rank`
/// singular triplets. rank 0 yields the zero vector.
TsvdSolution tsvd_solve(const Decomposition& svd, const VectorC& b, std::size_t rank);
/// Keeps sigma_i >= tau * sigma_max. Throws ConfigError when A is zero or tau outside [0, 1].
TsvdSolution tsvd_solve(const MatrixC& a, const VectorC& b, double tau);
TsvdSolution tsvd_solve_rank(const MatrixC& a, const VectorC& b, std::size_t rank);

/// Solution of (A^H A + alpha I) x = A^H b, evaluated through filter factors
/// sigma / (sigma^2 + alpha). Throws ConfigError when alpha <= 0.
VectorC tikhonov_solve(const Decomposition& svd, const VectorC& b, double alpha);
VectorC tikhonov_solve(const MatrixC& a, const VectorC& b, double alpha);

enum class Method { tsvd, tikhonov };
enum class SelectionPolicy { fixed, discrepancy };
/// Which sigma_max a relative threshold refers to: the mode's own, or the
/// largest over every mode of the frequency. The discrepancy policy always
/// caps against the global one.
enum class ThresholdReference { global, mode };

struct RegularizerConfig {
  Method method = Method::tsvd;
  double tsvd_rel_threshold = 1e-7;
  /// Relative to sigma_ref^2.
  double tikhonov_alpha = 1e-14;
  SelectionPolicy policy = SelectionPolicy::fixed;
  double noise_level = 0.0;
  /// Residual target multiplier for the discrepancy principle.
  double discrepancy_factor = 1.0;
  ThresholdReference reference = ThresholdReference::mode;

  /// Fixed threshold for exact data, discrepancy principle otherwise.
  static RegularizerConfig for_noise(double delta, Method method = Method::tsvd);
  void validate() const;
};

std::string to_string(Method m);
std::string to_string(SelectionPolicy p);
std::string to_string(ThresholdReference r);
Method parse_method(const std::string& s);
SelectionPolicy parse_policy(const std::string& s);
ThresholdReference parse_reference(const std::string& s);

/// Data expressed in a Decomposition's left singular basis.
struct ProjectedData {
  VectorC coeffs;         // U^H b
  double outside = 0.0;   // ||b - U U^H b||
  double b_norm = 0.0;
};

ProjectedData project(const Decomposition& svd, const VectorC& b);

/// ||A x_k - b|| for the rank-k truncated solution.
double truncated_residual(const ProjectedData& data, std::size_t k);

struct TruncationChoice {
  std::size_t rank = 0;
  /// Set when no rank meets the target; rank is then the full rank.
  bool target_missed = false;
};

/// Smallest k with ||A x_k - b|| <= target.
TruncationChoice choose_rank_for_residual(const VectorR& sigma, const ProjectedData& data, double target);
/// Fixed policy keeps sigma_i >= tau * sigma_max; discrepancy policy picks the
/// smallest k with ||A x_k - b|| <= delta ||b||.
TruncationChoice choose_truncation(const VectorR& sigma, const ProjectedData& data, double delta,
                                   SelectionPolicy policy, double tau);

/// Tikhonov parameter whose residual equals `target` (bisection in log alpha).
double choose_tikhonov_alpha(const Decomposition& svd, const ProjectedData& data, double target);

}  // namespace flatinv
