#include "flatinv/medium.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace flatinv {

using std::numbers::pi;

cplx green_point(double rho, double omega, double c0) {
  if (!(rho > 0.0)) throw NumericalError("green_point: rho must be positive");
  return -std::polar(1.0 / (4.0 * pi * rho), omega * rho / c0);
}

namespace {

// Smooth partition of unity: 1 for r <= a, 0 for r >= b.
double smooth_cutoff(double r, double a, double b) {
  if (r <= a) return 1.0;
  if (r >= b) return 0.0;
  const double t = (r - a) / (b - a);
  const double p = std::exp(-1.0 / t);
  const double q = std::exp(-1.0 / (1.0 - t));
  return q / (p + q);
}

}  // namespace

StaticAxisWeight::StaticAxisWeight(double hx, double hy) : hx_(hx), hy_(hy) {
  const double h = std::max(hx, hy);
  a_ = 2.0 * h;
  const double b = 12.0 * h;
  // Simpson nodes on [a, b] for the plane integral of cutoff(r) / sqrt(r^2 + d^2)
  const int steps = 2000;
  const double dr = (b - a_) / steps;
  radial_r_.reserve(steps + 1);
  radial_w_.reserve(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    const double r = a_ + i * dr;
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    radial_r_.push_back(r);
    radial_w_.push_back(w * smooth_cutoff(r, a_, b) * r * dr / 3.0);
  }
  // the punctured lattice inside the cutoff
  const long px = static_cast<long>(std::ceil(b / hx));
  const long py = static_cast<long>(std::ceil(b / hy));
  for (long q = -py; q <= py; ++q) {
    for (long p = -px; p <= px; ++p) {
      if (p == 0 && q == 0) continue;
      const double r = std::hypot(static_cast<double>(p) * hx, static_cast<double>(q) * hy);
      if (r >= b) continue;
      lattice_r2_.push_back(r * r);
      lattice_c_.push_back(smooth_cutoff(r, a_, b));
    }
  }
}

double StaticAxisWeight::operator()(double d) const {
  const double d2 = d * d;
  double radial = std::hypot(a_, d) - d;
  for (std::size_t i = 0; i < radial_r_.size(); ++i)
    radial += radial_w_[i] / std::sqrt(radial_r_[i] * radial_r_[i] + d2);
  double lattice = 0.0;
  for (std::size_t i = 0; i < lattice_r2_.size(); ++i) lattice += lattice_c_[i] / std::sqrt(lattice_r2_[i] + d2);
  return 2.0 * pi * radial / (hx_ * hy_) - lattice;
}

double static_axis_weight(double d, double hx, double hy) { return StaticAxisWeight(hx, hy)(d); }

cplx green_axis_value(double d, double hx, double hy, double omega, double c0) {
  return green_axis_value(StaticAxisWeight(hx, hy), d, omega, c0);
}

cplx green_axis_value(const StaticAxisWeight& weight, double d, double omega, double c0) {
  const double k = omega / c0;
  // G = -1/(4 pi rho) + smooth remainder; the remainder's axis value is
  // -(exp(i k d) - 1) / (4 pi d), tending to -i k / (4 pi) at d = 0
  cplx smooth{0.0, k};
  if (k * d > 1e-8) smooth = std::polar(1.0, 0.5 * k * d) * cplx{0.0, 2.0 * std::sin(0.5 * k * d) / d};
  return -(weight(d) + smooth) / (4.0 * pi);
}

double box_edge_weight(long j, std::size_t n) {
  if (n < 8) return 1.0;
  const long half = static_cast<long>(n) / 2;
  const long from_edge = j < 0 ? j + half : half - j;
  switch (from_edge) {
    case 0:
      return 0.75;
    case 1:
      return 7.0 / 6.0;
    case 2:
      return 23.0 / 24.0;
    default:
      return 1.0;
  }
}

ModeClasses::ModeClasses(const ModeLattice& lattice) {
  const std::size_t n = lattice.n();
  const bool square = std::abs(lattice.hx() - lattice.hy()) <= 1e-12 * lattice.hx();
  class_of_.resize(lattice.size());
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> ids;
  for (std::size_t m = 0; m < lattice.size(); ++m) {
    auto a = static_cast<std::size_t>(std::labs(lattice.k1(m)));
    auto b = static_cast<std::size_t>(std::labs(lattice.k2(m)));
    if (square && a > b) std::swap(a, b);
    auto [it, inserted] = ids.emplace(std::make_pair(a, b), representative_.size());
    if (inserted) {
      representative_.push_back(lattice.mode(a % n, b % n));
      members_.emplace_back();
    }
    class_of_[m] = it->second;
    members_[it->second].push_back(m);
  }
}

namespace {

// Distinct |z_k - z'_l| merged within a relative tolerance so that offsets
// equal in exact arithmetic share one table column.
void collect_offsets(GreenKernelTable& t) {
  const std::size_t rows = t.receiver.mz();
  const std::size_t cols = t.source.mz();
  std::vector<double> raw;
  raw.reserve(rows * cols);
  for (std::size_t k = 0; k < rows; ++k)
    for (std::size_t l = 0; l < cols; ++l) raw.push_back(std::abs(t.receiver.z(k) - t.source.z(l)));
  std::vector<double> sorted = raw;
  std::sort(sorted.begin(), sorted.end());
  const double scale = std::max(1.0, sorted.back());
  const double tol = 1e-10 * scale;
  t.offsets.clear();
  for (double d : sorted)
    if (t.offsets.empty() || d - t.offsets.back() > tol) t.offsets.push_back(d);
  t.offset_index.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto it = std::lower_bound(t.offsets.begin(), t.offsets.end(), raw[i] - tol);
    t.offset_index[i] = static_cast<std::size_t>(it - t.offsets.begin());
  }
}

}  // namespace

GreenKernelTable build_kernel_geometry(const Grid3D& source, const Grid3D& receiver, double omega, double c0) {
  if (!source.same_transverse_lattice(receiver))
    throw ConfigError("green kernel: source and receiver grids must share the transverse lattice");
  GreenKernelTable t;
  t.omega = omega;
  t.c0 = c0;
  t.receiver = receiver;
  t.source = source;
  t.lattice = ModeLattice(source);
  t.classes = ModeClasses(t.lattice);
  collect_offsets(t);
  return t;
}

GreenKernelTable build_green_kernel(const Grid3D& source, const Grid3D& receiver, double omega, double c0) {
  GreenKernelTable t = build_kernel_geometry(source, receiver, omega, c0);
  const std::size_t n = source.n();
  const double hx = source.hx();
  const double hy = source.hy();
  // Lattice of transverse offsets s = (p hx, q hy), p, q in [-n/2, n/2), origin at 0.
  const Grid3D offset_grid =
      Grid3D::uniform(0.0, static_cast<double>(n) * hx, 0.0, static_cast<double>(n) * hy, n, 0.0, 0.0, 1);
  const SlabTransform transform(offset_grid);

  std::vector<double> s2(n * n);
  std::vector<double> weight(n * n);
  for (std::size_t iq = 0; iq < n; ++iq) {
    const long q = ModeLattice::signed_index(iq, n);
    const double sy = static_cast<double>(q) * hy;
    for (std::size_t ip = 0; ip < n; ++ip) {
      const long p = ModeLattice::signed_index(ip, n);
      const double sx = static_cast<double>(p) * hx;
      s2[iq * n + ip] = sx * sx + sy * sy;
      weight[iq * n + ip] = box_edge_weight(p, n) * box_edge_weight(q, n);
    }
  }

  const StaticAxisWeight axis(hx, hy);
  const std::size_t n_off = t.offsets.size();
  const std::size_t n_cls = t.classes.count();
  t.values.assign(n_cls * n_off, cplx{});
  std::vector<cplx> slab(n * n);
  for (std::size_t o = 0; o < n_off; ++o) {
    const double d = t.offsets[o];
    for (std::size_t i = 1; i < n * n; ++i) slab[i] = weight[i] * green_point(std::sqrt(s2[i] + d * d), omega, c0);
    slab[0] = green_axis_value(axis, d, omega, c0);
    transform.forward(slab, slab);
    for (std::size_t c = 0; c < n_cls; ++c) t.values[c * n_off + o] = slab[t.classes.representative(c)];
  }
  return t;
}

namespace {
constexpr char kMagic[4] = {'L', 'A', 'F', '1'};
}

// Kernel cache file: LAF1 framing with dims (classes, 1, offsets) and the six
// header doubles carrying (omega, c0, receiver z_min, z_max, source z_min, z_max).
void save_kernel_table(const std::filesystem::path& path, const GreenKernelTable& t) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os.write(kMagic, 4);
  const std::uint32_t dims[3] = {static_cast<std::uint32_t>(t.classes.count()), 1u,
                                 static_cast<std::uint32_t>(t.offsets.size())};
  os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  const double hdr[6] = {t.omega, t.c0, t.receiver.z_min(), t.receiver.z_max(), t.source.z_min(), t.source.z_max()};
  os.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
  os.write(reinterpret_cast<const char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * sizeof(cplx)));
  if (!os) throw IoError("write failed: " + path.string());
}

void load_kernel_values(const std::filesystem::path& path, GreenKernelTable& t) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  char magic[4];
  std::uint32_t dims[3];
  double hdr[6];
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(dims), sizeof(dims));
  is.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw IoError("bad kernel cache header: " + path.string());
  if (dims[0] != t.classes.count() || dims[1] != 1 || dims[2] != t.offsets.size() || hdr[0] != t.omega ||
      hdr[1] != t.c0 || hdr[2] != t.receiver.z_min() || hdr[3] != t.receiver.z_max() ||
      hdr[4] != t.source.z_min() || hdr[5] != t.source.z_max())
    throw IoError("kernel cache does not match requested geometry: " + path.string());
  t.values.resize(static_cast<std::size_t>(dims[0]) * dims[2]);
  is.read(reinterpret_cast<char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * sizeof(cplx)));
  if (!is) throw IoError("truncated kernel cache: " + path.string());
}

SourceSet SourceSet::line_array() {
  SourceSet s;
  for (int y = -5; y <= 5; ++y) {
    s.positions.push_back({0.0, static_cast<double>(y), 6.0});
    s.amplitudes.emplace_back(1.0, 0.0);
  }
  return s;
}

ComplexField incident_field(const SourceSet& sources, const Grid3D& grid, double omega, double c0) {
  if (sources.positions.size() != sources.amplitudes.size())
    throw ConfigError("sources: positions and amplitudes differ in length");
  const double touch = 1e-9 * std::min({grid.hx(), grid.hy(), grid.hz()});
  ComplexField u0(grid);
  for (std::size_t iz = 0; iz < grid.mz(); ++iz) {
    for (std::size_t iy = 0; iy < grid.n(); ++iy) {
      for (std::size_t ix = 0; ix < grid.n(); ++ix) {
        const Point3 p{grid.x(ix), grid.y(iy), grid.z(iz)};
        cplx sum{};
        for (std::size_t s = 0; s < sources.positions.size(); ++s) {
          if (sources.amplitudes[s] == cplx{}) continue;
          const double rho = distance(p, sources.positions[s]);
          if (rho <= touch) {
            std::ostringstream msg;
            msg << "source " << s << " coincides with grid node (" << ix << ',' << iy << ',' << iz << ')';
            throw ConfigError(msg.str());
          }
          sum += sources.amplitudes[s] * green_point(rho, omega, c0);
        }
        u0.at(ix, iy, iz) = sum;
      }
    }
  }
  return u0;
}

SpectralField incident_field_spectral(const SourceSet& sources, const Grid3D& grid, double omega,
                                      const SlabTransform& transform, double c0) {
  return forward_xy(transform, incident_field(sources, grid, omega, c0));
}

double Bump::operator()(double x, double y, double z) const {
  const double dx = x - center.x;
  const double dy = y - center.y;
  const double dz = z - center.z;
  const double q = dx * dx + dy * dy + dz * dz + cross_yz * dy * dz;
  return weight * std::max(1.0 - q / (radius * radius), 0.0);
}

Phantom Phantom::three_bumps(double a0) {
  Phantom p;
  p.amplitude = a0;
  p.bumps = {
      Bump{{1.0, 2.0, 0.5}, 0.4, 1.0, 0.0},
      Bump{{4.0, -3.0, 0.5}, 0.25, 2.0, 1.5},
      Bump{{-3.0, 0.0, 0.45}, 0.3, 2.5, -1.5},
  };
  return p;
}

double Phantom::operator()(double x, double y, double z) const {
  double sum = 0.0;
  for (const Bump& b : bumps) sum += b(x, y, z);
  return amplitude * sum;
}

double Phantom::max_value() const {
  double best = 0.0;
  for (const Bump& b : bumps) best = std::max(best, (*this)(b.center.x, b.center.y, b.center.z));
  return best;
}

RealField Phantom::sample(const Grid3D& grid) const {
  RealField xi(grid);
  for (std::size_t iz = 0; iz < grid.mz(); ++iz)
    for (std::size_t iy = 0; iy < grid.n(); ++iy)
      for (std::size_t ix = 0; ix < grid.n(); ++ix) xi.at(ix, iy, iz) = (*this)(grid.x(ix), grid.y(iy), grid.z(iz));
  return xi;
}

double phantom_xi(const Phantom& phantom, double x, double y, double z) { return phantom(x, y, z); }

double contrast_from_max(double max_xi, double c0) {
  const double radicand = 1.0 - c0 * c0 * max_xi;
  if (!(radicand > 0.0)) throw ConfigError("contrast undefined: c0^2 * max xi >= 1");
  return 1.0 / std::sqrt(radicand) - 1.0;
}

double contrast(const Phantom& phantom, double c0) { return contrast_from_max(phantom.max_value(), c0); }

RealField xi_to_speed(const RealField& xi, double c0) {
  RealField c(xi.grid);
  const double base = 1.0 / (c0 * c0);
  for (std::size_t i = 0; i < xi.values.size(); ++i) {
    if (xi.values[i] == 0.0) {
      c.values[i] = c0;
      continue;
    }
    const double radicand = base - xi.values[i];
    if (!(radicand > 0.0)) {
      const std::size_t n = xi.grid.n();
      std::ostringstream msg;
      msg << "xi_to_speed: nonpositive radicand at node (" << i % n << ',' << (i / n) % n << ',' << i / (n * n)
          << ')';
      throw NumericalError(msg.str());
    }
    c.values[i] = 1.0 / std::sqrt(radicand);
  }
  return c;
}

}  // namespace flatinv
