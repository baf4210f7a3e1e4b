#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "flatinv/errors.hpp"

namespace flatinv {

using cplx = std::complex<double>;

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

double distance(const Point3& a, const Point3& b);

/// Uniform Cartesian grid over a slab. The transverse lattice is periodic:
/// nodes sit at x_min + i*hx for i in [0, n), so x_max itself is not a node.
/// The axial nodes are stored explicitly so scatterer and receiver grids of
/// different extents share one representation.
class Grid3D {
 public:
  Grid3D() = default;

  static Grid3D uniform(double x_min, double x_max, double y_min, double y_max,
                        std::size_t n, double z_lo, double z_hi, std::size_t mz);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }
  double z_min() const { return z_.front(); }
  double z_max() const { return z_.back(); }

  std::size_t n() const { return n_; }
  std::size_t mz() const { return z_.size(); }
  std::size_t slab_size() const { return n_ * n_; }
  std::size_t node_count() const { return n_ * n_ * z_.size(); }

  double hx() const { return (x_max_ - x_min_) / static_cast<double>(n_); }
  double hy() const { return (y_max_ - y_min_) / static_cast<double>(n_); }
  /// Axial spacing. A single-slab grid has no spacing; 1 is returned so the
  /// cell volume degenerates to the transverse cell area.
  double hz() const;
  double cell_volume() const { return hx() * hy() * hz(); }

  double x(std::size_t ix) const { return x_min_ + static_cast<double>(ix) * hx(); }
  double y(std::size_t iy) const { return y_min_ + static_cast<double>(iy) * hy(); }
  double z(std::size_t iz) const { return z_[iz]; }
  const std::vector<double>& z_nodes() const { return z_; }

  std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return (iz * n_ + iy) * n_ + ix;
  }

  std::size_t nearest_ix(double x) const;
  std::size_t nearest_iy(double y) const;
  std::size_t nearest_iz(double z) const;

  bool same_transverse_lattice(const Grid3D& other) const;
  bool operator==(const Grid3D& other) const;

 private:
  double x_min_ = 0.0;
  double x_max_ = 0.0;
  double y_min_ = 0.0;
  double y_max_ = 0.0;
  std::size_t n_ = 0;
  std::vector<double> z_;
};

struct GridConfig {
  double x_min = -10.0;
  double x_max = 10.0;
  double y_min = -10.0;
  double y_max = 10.0;
  std::size_t n = 64;
  double scatterer_z_lo = -0.5;
  double scatterer_z_hi = 1.5;
  std::size_t m = 31;
  double receiver_z_lo = 6.01;
  double receiver_z_hi = 6.5;
  std::size_t m1 = 31;
};

struct GridPair {
  Grid3D scatterer;
  Grid3D receiver;
};

/// Builds the scatterer (X) and receiver (Y) grids on one transverse lattice.
/// Throws ConfigError when the axial ranges overlap.
GridPair make_grids(const GridConfig& config);

bool is_power_of_two(std::size_t n);

/// Complex samples on every node of a Grid3D, iz-major then iy then ix.
struct ComplexField {
  Grid3D grid;
  std::vector<cplx> values;

  ComplexField() = default;
  explicit ComplexField(Grid3D g);
  ComplexField(Grid3D g, std::vector<cplx> v);

  cplx& at(std::size_t ix, std::size_t iy, std::size_t iz) { return values[grid.index(ix, iy, iz)]; }
  const cplx& at(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return values[grid.index(ix, iy, iz)];
  }
  std::span<cplx> slab(std::size_t iz);
  std::span<const cplx> slab(std::size_t iz) const;
  bool all_finite() const;
};

/// Real samples on every node; same layout as ComplexField.
struct RealField {
  Grid3D grid;
  std::vector<double> values;

  RealField() = default;
  explicit RealField(Grid3D g);

  double& at(std::size_t ix, std::size_t iy, std::size_t iz) { return values[grid.index(ix, iy, iz)]; }
  double at(std::size_t ix, std::size_t iy, std::size_t iz) const { return values[grid.index(ix, iy, iz)]; }
  std::span<const double> slab(std::size_t iz) const;
};

/// Per-slab transverse spectra. Slab-major: values[iz * n*n + m], where the
/// mode index m = k2 * n + k1 follows FFT storage order on both axes.
struct SpectralField {
  Grid3D grid;
  std::vector<cplx> values;

  SpectralField() = default;
  explicit SpectralField(Grid3D g);

  std::size_t mode_count() const { return grid.slab_size(); }
  cplx& at(std::size_t mode, std::size_t iz) { return values[iz * grid.slab_size() + mode]; }
  const cplx& at(std::size_t mode, std::size_t iz) const { return values[iz * grid.slab_size() + mode]; }
  std::span<cplx> slab(std::size_t iz);
  std::span<const cplx> slab(std::size_t iz) const;
};

/// Discrete L2 norm with uniform cell-volume weighting.
double l2_norm(const ComplexField& field);
double l2_norm(const RealField& field);
/// Plain Euclidean norm of the stored spectral samples.
double euclidean_norm(std::span<const cplx> values);

RealField real_part(const ComplexField& field);
ComplexField to_complex(const RealField& field);

// Binary dump: "LAF1", u32 n, u32 n, u32 mz, f64 x_min x_max y_min y_max
// z_min z_max, then little-endian interleaved (re, im) f64 in iz, iy, ix order.
void write_field(const std::filesystem::path& path, const ComplexField& field);
ComplexField read_field(const std::filesystem::path& path);

/// One CSV per z-slice, named <prefix>_z<iz>.csv, columns x,y,re,im.
/// Returns the written paths.
std::vector<std::filesystem::path> write_slice_csv(const std::filesystem::path& dir,
                                                   const std::string& prefix,
                                                   const ComplexField& field);

}  // namespace flatinv
