#pragma once

#include <filesystem>
#include <vector>

#include "flatinv/field.hpp"
#include "flatinv/spectral.hpp"

namespace flatinv {

/// Outgoing free-space Green's function of the Helmholtz operator,
/// G(rho) = -exp(i omega rho / c0) / (4 pi rho). Throws NumericalError at rho <= 0.
cplx green_point(double rho, double omega, double c0 = 1.0);

/// On-axis lattice value w(d) of 1/sqrt(r^2 + d^2): with it, the lattice sum
/// hx*hy*(w + sum_{s != 0} f(s)) integrates f = cutoff / sqrt(r^2 + d^2) over the
/// plane exactly for a smooth cutoff, which corrects the trapezoid rule for
/// the near-singular part of G. Tends to 1/d once d is large against hx, hy.
double static_axis_weight(double d, double hx, double hy);
/// static_axis_weight with the d-independent quadrature set up once per lattice.
class StaticAxisWeight {
 public:
  StaticAxisWeight(double hx, double hy);
  double operator()(double d) const;

 private:
  double hx_;
  double hy_;
  double a_ = 0.0;
  std::vector<double> radial_r_;
  std::vector<double> radial_w_;
  std::vector<double> lattice_r2_;
  std::vector<double> lattice_c_;
};
/// Sample used for G at zero transverse offset: the corrected weight of the
/// static part -1/(4 pi rho) plus the axis value of the smooth remainder.
/// Finite at d = 0.
cplx green_axis_value(double d, double hx, double hy, double omega, double c0 = 1.0);
cplx green_axis_value(const StaticAxisWeight& weight, double d, double omega, double c0 = 1.0);
/// Weight of signed lattice index j on a periodic lattice of n points: the
/// trapezoid rule with third-order Gregory corrections at the box edge.
double box_edge_weight(long j, std::size_t n);

/// Groups lattice modes on which a transversely radial kernel takes equal
/// values: (|k1|, |k2|), additionally symmetric under k1 <-> k2 when hx == hy.
class ModeClasses {
 public:
  ModeClasses() = default;
  explicit ModeClasses(const ModeLattice& lattice);

  std::size_t count() const { return representative_.size(); }
  std::size_t class_of(std::size_t mode) const { return class_of_[mode]; }
  std::size_t representative(std::size_t cls) const { return representative_[cls]; }
  const std::vector<std::size_t>& members(std::size_t cls) const { return members_[cls]; }

 private:
  std::vector<std::size_t> class_of_;
  std::vector<std::size_t> representative_;
  std::vector<std::vector<std::size_t>> members_;
};

/// Transverse spectra of G for every axial offset between a receiver grid
/// (rows) and a source grid (columns). Entries are stored once per distinct
/// |z_k - z'_l| and once per mode class, so equal offsets and symmetric
/// modes give bit-identical values.
struct GreenKernelTable {
  double omega = 0.0;
  double c0 = 1.0;
  Grid3D receiver;
  Grid3D source;
  ModeLattice lattice;
  ModeClasses classes;
  std::vector<double> offsets;            // distinct |z_k - z'_l|, ascending
  std::vector<std::size_t> offset_index;  // [k * source.mz() + l]
  std::vector<cplx> values;               // [class * offsets.size() + offset]

  std::size_t rows() const { return receiver.mz(); }
  std::size_t cols() const { return source.mz(); }
  std::size_t offset_of(std::size_t k, std::size_t l) const { return offset_index[k * cols() + l]; }
  const cplx& by_class(std::size_t cls, std::size_t k, std::size_t l) const {
    return values[cls * offsets.size() + offset_of(k, l)];
  }
  const cplx& entry(std::size_t mode, std::size_t k, std::size_t l) const {
    return by_class(classes.class_of(mode), k, l);
  }
};

/// Samples G on the periodic offset lattice for each needed axial offset and
/// transforms it with the forward slab transform. Samples near the box edge
/// carry Gregory end weights, and the on-axis sample of every offset is
/// replaced by green_axis_value, which removes the rho = 0 singularity of the
/// coincident offset.
GreenKernelTable build_green_kernel(const Grid3D& source, const Grid3D& receiver, double omega,
                                    double c0 = 1.0);

void save_kernel_table(const std::filesystem::path& path, const GreenKernelTable& table);
/// Loads values into a table whose geometry was rebuilt by the caller
/// (build_kernel_geometry); throws IoError on any shape mismatch.
void load_kernel_values(const std::filesystem::path& path, GreenKernelTable& table);
/// Everything of build_green_kernel except the kernel values.
GreenKernelTable build_kernel_geometry(const Grid3D& source, const Grid3D& receiver, double omega,
                                       double c0 = 1.0);

struct SourceSet {
  std::vector<Point3> positions;
  std::vector<cplx> amplitudes;

  /// Eleven unit sources at (0, y, 6), y = -5..5.
  static SourceSet line_array();
};

/// u0(x) = sum_m A_m G(|x - x_m|) sampled on `grid`. Throws ConfigError when
/// a source coincides with a node.
ComplexField incident_field(const SourceSet& sources, const Grid3D& grid, double omega, double c0 = 1.0);
SpectralField incident_field_spectral(const SourceSet& sources, const Grid3D& grid, double omega,
                                      const SlabTransform& transform, double c0 = 1.0);

/// Clipped paraboloid w * (1 - q / r^2)_+ where q is the quadratic form
/// dx^2 + dy^2 + dz^2 + cross_yz * dy * dz about `center`.
struct Bump {
  Point3 center;
  double radius = 1.0;
  double weight = 1.0;
  double cross_yz = 0.0;

  double operator()(double x, double y, double z) const;
};

struct Phantom {
  double amplitude = 0.3;
  std::vector<Bump> bumps;

  /// The three-bump test medium; `a0` scales all bumps.
  static Phantom three_bumps(double a0 = 0.3);

  double operator()(double x, double y, double z) const;
  /// Each bump peaks at its centre when |cross_yz| < 2.
  double max_value() const;
  RealField sample(const Grid3D& grid) const;
};

double phantom_xi(const Phantom& phantom, double x, double y, double z);

/// max 1/sqrt(1 - c0^2 xi) - 1. Throws ConfigError when c0^2 max xi >= 1.
double contrast(const Phantom& phantom, double c0 = 1.0);
double contrast_from_max(double max_xi, double c0 = 1.0);

/// c = 1/sqrt(c0^-2 - xi). Throws NumericalError naming the first node with
/// a nonpositive radicand.
RealField xi_to_speed(const RealField& xi, double c0 = 1.0);

}  // namespace flatinv
