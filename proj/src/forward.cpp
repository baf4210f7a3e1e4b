#include "flatinv/forward.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "flatinv/simd/kernels.hpp"

namespace flatinv {

std::vector<double> trapezoid_weights(const Grid3D& grid) {
  const std::size_t mz = grid.mz();
  if (mz == 1) return {1.0};
  std::vector<double> w(mz, grid.hz());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

KernelOperator::KernelOperator(const GreenKernelTable& table)
    : KernelOperator(table, trapezoid_weights(table.source)) {}

KernelOperator::KernelOperator(const GreenKernelTable& table, std::span<const double> weights)
    : omega_(table.omega),
      receiver_(table.receiver),
      source_(table.source),
      classes_(table.classes),
      rows_(table.rows()),
      cols_(table.cols()) {
  if (weights.size() != cols_) throw ConfigError("kernel operator: quadrature weights do not match source grid");
  const double w2 = table.omega * table.omega;
  matrices_.resize(classes_.count() * rows_ * cols_);
  for (std::size_t c = 0; c < classes_.count(); ++c) {
    cplx* a = matrices_.data() + c * rows_ * cols_;
    for (std::size_t k = 0; k < rows_; ++k)
      for (std::size_t l = 0; l < cols_; ++l) a[k * cols_ + l] = (w2 * weights[l]) * table.by_class(c, k, l);
  }
}

SpectralField KernelOperator::apply(const SpectralField& v) const {
  if (!(v.grid == source_)) throw ConfigError("kernel operator: input is not on the source grid");
  const auto& kern = simd::active_kernels();
  SpectralField out(receiver_);
  const std::size_t modes = v.mode_count();
  std::vector<cplx> column(cols_);
  std::vector<cplx> result(rows_);
  for (std::size_t m = 0; m < modes; ++m) {
    for (std::size_t l = 0; l < cols_; ++l) column[l] = v.at(m, l);
    kern.matvec(class_matrix(classes_.class_of(m)).data(), rows_, cols_, column.data(), result.data());
    for (std::size_t k = 0; k < rows_; ++k) out.at(m, k) = result[k];
  }
  return out;
}

SpectralField contrast_source(const SpectralField& u, const RealField& xi, const SlabTransform& transform) {
  if (!(u.grid == xi.grid)) throw ConfigError("contrast_source: xi and field grids differ");
  const auto& kern = simd::active_kernels();
  SpectralField v(u.grid);
  std::vector<cplx> slab(u.grid.slab_size());
  for (std::size_t iz = 0; iz < u.grid.mz(); ++iz) {
    const auto xs = xi.slab(iz);
    bool any = false;
    for (double x : xs) any = any || x != 0.0;
    if (!any) continue;
    transform.inverse(u.slab(iz), slab);
    kern.scale_real(xs.data(), slab.data(), slab.data(), slab.size());
    transform.forward(slab, v.slab(iz));
  }
  return v;
}

SpectralField born_map(const SpectralField& u0, const SpectralField& u, const KernelOperator& kernel_xx,
                       const RealField& xi, const SlabTransform& transform) {
  SpectralField next = kernel_xx.apply(contrast_source(u, xi, transform));
  for (std::size_t i = 0; i < next.values.size(); ++i) next.values[i] = u0.values[i] + next.values[i];
  return next;
}

ForwardResult born_iterate(const SpectralField& u0, const KernelOperator& kernel_xx, const RealField& xi,
                           double omega, const SlabTransform& transform, const BornOptions& options) {
  if (!(kernel_xx.source() == u0.grid) || !(kernel_xx.receiver() == u0.grid))
    throw ConfigError("born_iterate: kernel must map the scatterer grid onto itself");
  if (options.max_iter == 0) throw ConfigError("born_iterate: max_iter must be positive");
  const double u0_norm = euclidean_norm(u0.values);
  const double scale = u0_norm > 0.0 ? u0_norm : 1.0;

  ForwardResult result;
  SpectralField current = u0;
  std::vector<cplx> diff(u0.values.size());
  std::size_t rising = 0;
  for (std::size_t n = 1; n <= options.max_iter; ++n) {
    SpectralField next = born_map(u0, current, kernel_xx, xi, transform);
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = next.values[i] - current.values[i];
    const double r = euclidean_norm(diff) / scale;
    if (!std::isfinite(r)) throw DivergenceError("born_iterate: non-finite update", omega);
    const double previous = result.residual_history.empty() ? r : result.residual_history.back();
    result.residual_history.push_back(r);
    current = std::move(next);
    result.iterations = n;
    if (r <= options.tol) {
      result.converged = true;
      break;
    }
    rising = r > previous ? rising + 1 : 0;
    if (rising >= options.divergence_window) {
      std::ostringstream msg;
      msg << "born_iterate: residual grew for " << rising << " consecutive iterations at omega=" << omega;
      throw DivergenceError(msg.str(), omega);
    }
  }
  result.u_nu = std::move(current);
  return result;
}

ScatteredData scattered_data(const SpectralField& v, const KernelOperator& kernel_xy, const SlabTransform& transform) {
  ScatteredData out;
  out.w_spec = kernel_xy.apply(v);
  out.w_field = inverse_xy(transform, out.w_spec);
  return out;
}

ScatteredData scattered_data(const SpectralField& u_nu, const RealField& xi, const KernelOperator& kernel_xy,
                             const SlabTransform& transform) {
  return scattered_data(contrast_source(u_nu, xi, transform), kernel_xy, transform);
}

ForwardResult solve_forward(const SpectralField& u0, const KernelOperator& kernel_xx,
                            const KernelOperator& kernel_xy, const RealField& xi, double omega,
                            const SlabTransform& transform, const BornOptions& options) {
  ForwardResult result = born_iterate(u0, kernel_xx, xi, omega, transform, options);
  ScatteredData data = scattered_data(result.u_nu, xi, kernel_xy, transform);
  result.w_spec = std::move(data.w_spec);
  result.w_field = std::move(data.w_field);
  return result;
}

ComplexField add_noise(const ComplexField& w, double delta, std::uint64_t seed) {
  if (delta < 0.0) throw ConfigError("add_noise: delta must be nonnegative");
  ComplexField out = w;
  const double w_norm = l2_norm(w);
  if (delta == 0.0 || w_norm == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexField noise(w.grid);
  for (cplx& v : noise.values) {
    const double re = normal(rng);
    const double im = normal(rng);
    v = {re, im};
  }
  const double factor = delta * w_norm / l2_norm(noise);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += factor * noise.values[i];
  return out;
}

}  // namespace flatinv
