#include "flatinv/regularize.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <vector>

namespace flatinv {

ModeSystem assemble_mode_system(const GreenKernelTable& kernel_xy, std::size_t mode, double omega,
                                std::span<const double> weights) {
  if (weights.size() != kernel_xy.cols())
    throw ConfigError("assemble_mode_system: weights do not match the scatterer grid");
  if (mode >= kernel_xy.lattice.size()) throw ConfigError("assemble_mode_system: mode out of range");
  ModeSystem sys;
  sys.mode = mode;
  sys.omega = omega;
  sys.a.resize(static_cast<Eigen::Index>(kernel_xy.rows()), static_cast<Eigen::Index>(kernel_xy.cols()));
  const double w2 = omega * omega;
  for (std::size_t k = 0; k < kernel_xy.rows(); ++k)
    for (std::size_t l = 0; l < kernel_xy.cols(); ++l)
      sys.a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
          (w2 * weights[l]) * kernel_xy.entry(mode, k, l);
  return sys;
}

Decomposition decompose(const MatrixC& a) {
  Eigen::BDCSVD<MatrixC> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

std::size_t rank_above(const VectorR& sigma, double threshold) {
  std::size_t k = 0;
  while (k < static_cast<std::size_t>(sigma.size()) && sigma(static_cast<Eigen::Index>(k)) > 0.0 &&
         sigma(static_cast<Eigen::Index>(k)) >= threshold)
    ++k;
  return k;
}

TsvdSolution tsvd_solve(const Decomposition& svd, const VectorC& b, std::size_t rank) {
  if (b.size() != svd.u.rows()) throw ConfigError("tsvd_solve: data length does not match matrix rows");
  TsvdSolution out;
  out.sigma = svd.sigma;
  out.rank = std::min<std::size_t>(rank, static_cast<std::size_t>(svd.sigma.size()));
  out.x = VectorC::Zero(svd.v.rows());
  for (std::size_t i = 0; i < out.rank; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const cplx c = svd.u.col(ii).dot(b) / svd.sigma(ii);  // Eigen's dot conjugates the first operand
    out.x += c * svd.v.col(ii);
  }
  return out;
}

TsvdSolution tsvd_solve(const MatrixC& a, const VectorC& b, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tsvd_solve: tau must lie in [0, 1]");
  const Decomposition svd = decompose(a);
  if (svd.sigma.size() == 0 || svd.sigma(0) == 0.0) throw ConfigError("tsvd_solve: matrix is zero");
  return tsvd_solve(svd, b, rank_above(svd.sigma, tau * svd.sigma(0)));
}

TsvdSolution tsvd_solve_rank(const MatrixC& a, const VectorC& b, std::size_t rank) {
  return tsvd_solve(decompose(a), b, rank);
}

VectorC tikhonov_solve(const Decomposition& svd, const VectorC& b, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("tikhonov_solve: alpha must be positive");
  if (b.size() != svd.u.rows()) throw ConfigError("tikhonov_solve: data length does not match matrix rows");
  VectorC x = VectorC::Zero(svd.v.rows());
  for (Eigen::Index i = 0; i < svd.sigma.size(); ++i) {
    const double s = svd.sigma(i);
    if (s == 0.0) continue;
    x += (svd.u.col(i).dot(b) * (s / (s * s + alpha))) * svd.v.col(i);
  }
  return x;
}

VectorC tikhonov_solve(const MatrixC& a, const VectorC& b, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("tikhonov_solve: alpha must be positive");
  return tikhonov_solve(decompose(a), b, alpha);
}

RegularizerConfig RegularizerConfig::for_noise(double delta, Method method) {
  RegularizerConfig c;
  c.method = method;
  c.noise_level = delta;
  c.policy = delta > 0.0 ? SelectionPolicy::discrepancy : SelectionPolicy::fixed;
  return c;
}

void RegularizerConfig::validate() const {
  if (method == Method::tsvd && !(tsvd_rel_threshold > 0.0 && tsvd_rel_threshold <= 1.0))
    throw ConfigError("regularizer: tsvd threshold must lie in (0, 1]");
  if (method == Method::tikhonov && !(tikhonov_alpha > 0.0))
    throw ConfigError("regularizer: tikhonov alpha must be positive");
  if (policy == SelectionPolicy::discrepancy && !(noise_level > 0.0))
    throw ConfigError("regularizer: discrepancy policy needs a positive noise level");
  if (!(discrepancy_factor > 0.0)) throw ConfigError("regularizer: discrepancy factor must be positive");
}

std::string to_string(Method m) { return m == Method::tsvd ? "tsvd" : "tikhonov"; }
std::string to_string(SelectionPolicy p) { return p == SelectionPolicy::fixed ? "fixed" : "discrepancy"; }
std::string to_string(ThresholdReference r) { return r == ThresholdReference::global ? "global" : "mode"; }

Method parse_method(const std::string& s) {
  if (s == "tsvd") return Method::tsvd;
  if (s == "tikhonov") return Method::tikhonov;
  throw ConfigError("unknown regularization method: " + s);
}

SelectionPolicy parse_policy(const std::string& s) {
  if (s == "fixed") return SelectionPolicy::fixed;
  if (s == "discrepancy") return SelectionPolicy::discrepancy;
  throw ConfigError("unknown selection policy: " + s);
}

ThresholdReference parse_reference(const std::string& s) {
  if (s == "global") return ThresholdReference::global;
  if (s == "mode") return ThresholdReference::mode;
  throw ConfigError("unknown threshold reference: " + s);
}

ProjectedData project(const Decomposition& svd, const VectorC& b) {
  ProjectedData p;
  p.coeffs = svd.u.adjoint() * b;
  p.outside = (b - svd.u * p.coeffs).norm();
  p.b_norm = b.norm();
  return p;
}

double truncated_residual(const ProjectedData& data, std::size_t k) {
  double tail = data.outside * data.outside;
  for (auto i = static_cast<Eigen::Index>(k); i < data.coeffs.size(); ++i) tail += std::norm(data.coeffs(i));
  return std::sqrt(tail);
}

TruncationChoice choose_rank_for_residual(const VectorR& sigma, const ProjectedData& data, double target) {
  const std::size_t full = rank_above(sigma, std::numeric_limits<double>::min());
  // Residuals from the full rank upwards, accumulated without cancellation.
  std::vector<double> residual(full + 1);
  double tail = data.outside * data.outside;
  for (auto i = static_cast<Eigen::Index>(full); i < data.coeffs.size(); ++i) tail += std::norm(data.coeffs(i));
  residual[full] = std::sqrt(tail);
  for (std::size_t k = full; k-- > 0;) {
    tail += std::norm(data.coeffs(static_cast<Eigen::Index>(k)));
    residual[k] = std::sqrt(tail);
  }
  for (std::size_t k = 0; k <= full; ++k)
    if (residual[k] <= target) return {k, false};
  return {full, true};
}

TruncationChoice choose_truncation(const VectorR& sigma, const ProjectedData& data, double delta,
                                   SelectionPolicy policy, double tau) {
  if (policy == SelectionPolicy::fixed) {
    if (sigma.size() == 0) return {0, false};
    return {rank_above(sigma, tau * sigma(0)), false};
  }
  return choose_rank_for_residual(sigma, data, delta * data.b_norm);
}

double choose_tikhonov_alpha(const Decomposition& svd, const ProjectedData& data, double target) {
  const auto residual = [&](double alpha) {
    double r2 = data.outside * data.outside;
    for (Eigen::Index i = 0; i < data.coeffs.size(); ++i) {
      const double s = i < svd.sigma.size() ? svd.sigma(i) : 0.0;
      const double f = alpha / (s * s + alpha);
      r2 += f * f * std::norm(data.coeffs(i));
    }
    return std::sqrt(r2);
  };
  const double smax = svd.sigma.size() > 0 ? svd.sigma(0) : 0.0;
  if (smax == 0.0) return 1.0;
  double lo = std::log(smax * smax * 1e-32);
  double hi = std::log(smax * smax * 1e8);
  if (residual(std::exp(lo)) >= target) return std::exp(lo);
  if (residual(std::exp(hi)) <= target) return std::exp(hi);
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (residual(std::exp(mid)) > target)
      hi = mid;
    else
      lo = mid;
  }
  return std::exp(lo);
}

}  // namespace flatinv
