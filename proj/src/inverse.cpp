#include "flatinv/inverse.hpp"

#include <algorithm>
#include <cmath>

#include "flatinv/simd/kernels.hpp"

namespace flatinv {

ModeSolveResult solve_modes(const SpectralField& w_spec, const GreenKernelTable& kernel_xy,
                            const RegularizerConfig& reg) {
  reg.validate();
  if (!(w_spec.grid == kernel_xy.receiver)) throw ConfigError("solve_modes: data is not on the receiver grid");
  const std::vector<double> weights = trapezoid_weights(kernel_xy.source);
  const ModeClasses& classes = kernel_xy.classes;
  const std::size_t modes = w_spec.mode_count();
  const std::size_t rows = kernel_xy.rows();
  const std::size_t cols = kernel_xy.cols();

  std::vector<Decomposition> svds;
  svds.reserve(classes.count());
  ModeSolveResult result;
  result.class_sigma.reserve(classes.count());
  double global_max = 0.0;
  for (std::size_t c = 0; c < classes.count(); ++c) {
    const ModeSystem sys = assemble_mode_system(kernel_xy, classes.representative(c), kernel_xy.omega, weights);
    svds.push_back(decompose(sys.a));
    result.class_sigma.push_back(svds.back().sigma);
    if (svds.back().sigma.size() > 0) global_max = std::max(global_max, svds.back().sigma(0));
  }

  ModeSolveStats& stats = result.stats;
  stats.sigma_ref = global_max;
  stats.ranks.assign(modes, 0);
  if (reg.policy == SelectionPolicy::discrepancy) {
    stats.mode_target =
        reg.discrepancy_factor * reg.noise_level * euclidean_norm(w_spec.values) / std::sqrt(static_cast<double>(modes));
  }

  result.v_spec = SpectralField(kernel_xy.source);
  VectorC b(static_cast<Eigen::Index>(rows));
  for (std::size_t m = 0; m < modes; ++m) {
    const Decomposition& svd = svds[classes.class_of(m)];
    const double smax = svd.sigma.size() > 0 ? svd.sigma(0) : 0.0;
    // noise is white across modes, so its admissible floor is set globally
    const bool per_mode = reg.reference == ThresholdReference::mode && reg.policy == SelectionPolicy::fixed;
    const double sigma_ref = per_mode ? smax : global_max;
    for (std::size_t k = 0; k < rows; ++k) b(static_cast<Eigen::Index>(k)) = w_spec.at(m, k);
    try {
      VectorC x;
      std::size_t rank = 0;
      if (reg.method == Method::tsvd) {
        const std::size_t fixed_rank = rank_above(svd.sigma, reg.tsvd_rel_threshold * sigma_ref);
        rank = fixed_rank;
        if (reg.policy == SelectionPolicy::discrepancy) {
          const ProjectedData data = project(svd, b);
          const TruncationChoice choice = choose_rank_for_residual(svd.sigma, data, stats.mode_target);
          if (choice.target_missed || choice.rank > fixed_rank) ++stats.capped_modes;
          rank = std::min(fixed_rank, choice.rank);
        }
        x = tsvd_solve(svd, b, rank).x;
      } else {
        double alpha = reg.tikhonov_alpha * sigma_ref * sigma_ref;
        if (reg.policy == SelectionPolicy::discrepancy) {
          const double chosen = choose_tikhonov_alpha(svd, project(svd, b), stats.mode_target);
          if (chosen < alpha) ++stats.capped_modes;
          alpha = std::max(alpha, chosen);
        }
        if (!(alpha > 0.0)) alpha = std::numeric_limits<double>::min();
        x = tikhonov_solve(svd, b, alpha);
        rank = rank_above(svd.sigma, std::sqrt(alpha));
      }
      if (!x.allFinite()) throw NumericalError("non-finite mode solution");
      for (std::size_t l = 0; l < cols; ++l) result.v_spec.at(m, l) = x(static_cast<Eigen::Index>(l));
      stats.ranks[m] = rank;
      if (rank == 0) ++stats.zero_rank_modes;
    } catch (const std::exception&) {
      ++stats.failed_modes;
      for (std::size_t l = 0; l < cols; ++l) result.v_spec.at(m, l) = cplx{};
    }
  }
  return result;
}

SpectralField recompute_internal_field(const SpectralField& v_spec, const SpectralField& u0_spec,
                                       const KernelOperator& kernel_xx) {
  if (!(u0_spec.grid == kernel_xx.receiver())) throw ConfigError("recompute_internal_field: grid mismatch");
  SpectralField u = kernel_xx.apply(v_spec);
  for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] = u0_spec.values[i] + u.values[i];
  return u;
}

XiEstimate extract_xi_lsq(std::span<const ComplexField> v, std::span<const ComplexField> u, double eps_div) {
  if (v.empty() || v.size() != u.size()) throw ConfigError("extract_xi: need matching nonempty V and u sets");
  const Grid3D& grid = v.front().grid;
  for (std::size_t f = 0; f < v.size(); ++f)
    if (!(v[f].grid == grid) || !(u[f].grid == grid)) throw ConfigError("extract_xi: grids differ");

  const std::size_t nodes = grid.node_count();
  std::vector<double> denom(nodes, 0.0);
  std::vector<cplx> numer(nodes, cplx{});
  for (std::size_t f = 0; f < v.size(); ++f) {
    for (std::size_t i = 0; i < nodes; ++i) {
      const cplx uu = u[f].values[i];
      denom[i] += std::norm(uu);
      numer[i] += std::conj(uu) * v[f].values[i];
    }
  }
  const double max_denom = *std::max_element(denom.begin(), denom.end());
  const double floor = eps_div * eps_div * max_denom;

  XiEstimate out{RealField(grid)};
  std::vector<double> imag(nodes, 0.0);
  std::size_t masked = 0;
  for (std::size_t i = 0; i < nodes; ++i) {
    if (!(denom[i] > 0.0) || denom[i] < floor) {
      ++masked;
      continue;
    }
    out.xi.values[i] = numer[i].real() / denom[i];
    imag[i] = numer[i].imag() / denom[i];
  }
  out.imag_norm = std::sqrt(simd::active_kernels().sum_sq(imag.data(), nodes) * grid.cell_volume());
  out.masked_fraction = static_cast<double>(masked) / static_cast<double>(nodes);
  return out;
}

XiEstimate extract_xi_single(const ComplexField& v, const ComplexField& u, double eps_div) {
  return extract_xi_lsq(std::span(&v, 1), std::span(&u, 1), eps_div);
}

FrequencyInversion invert_frequency(const ComplexField& w_field, const FrequencyContext& ctx,
                                    const SlabTransform& transform, const RegularizerConfig& reg, double eps_div) {
  if (ctx.kernel_xy == nullptr || ctx.kernel_xx == nullptr || ctx.u0_spec == nullptr)
    throw ConfigError("invert_frequency: incomplete frequency context");
  FrequencyInversion out;
  out.omega = ctx.omega;
  const SpectralField w_spec = forward_xy(transform, w_field);
  ModeSolveResult modes = solve_modes(w_spec, *ctx.kernel_xy, reg);
  const SpectralField u_spec = recompute_internal_field(modes.v_spec, *ctx.u0_spec, *ctx.kernel_xx);
  out.v = inverse_xy(transform, modes.v_spec);
  out.u = inverse_xy(transform, u_spec);
  out.xi = extract_xi_single(out.v, out.u, eps_div);
  out.stats = std::move(modes.stats);
  out.class_sigma = std::move(modes.class_sigma);
  return out;
}

}  // namespace flatinv
