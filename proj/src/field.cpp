#include "flatinv/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "flatinv/simd/kernels.hpp"

namespace flatinv {

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

double distance(const Point3& a, const Point3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

Grid3D Grid3D::uniform(double x_min, double x_max, double y_min, double y_max, std::size_t n,
                       double z_lo, double z_hi, std::size_t mz) {
  if (!(x_max > x_min) || !(y_max > y_min)) throw ConfigError("grid: transverse bounds must be increasing");
  if (!is_power_of_two(n) || n < 2) throw ConfigError("grid: n must be a power of two >= 2");
  if (mz == 0) throw ConfigError("grid: need at least one z node");
  if (mz > 1 && !(z_hi > z_lo)) throw ConfigError("grid: z bounds must be increasing");
  if (mz == 1 && z_hi != z_lo) throw ConfigError("grid: single-slab grid needs z_lo == z_hi");
  Grid3D g;
  g.x_min_ = x_min;
  g.x_max_ = x_max;
  g.y_min_ = y_min;
  g.y_max_ = y_max;
  g.n_ = n;
  g.z_.resize(mz);
  for (std::size_t k = 0; k < mz; ++k) {
    g.z_[k] = mz == 1 ? z_lo
                      : z_lo + (z_hi - z_lo) * static_cast<double>(k) / static_cast<double>(mz - 1);
  }
  return g;
}

double Grid3D::hz() const {
  if (z_.size() < 2) return 1.0;
  return (z_.back() - z_.front()) / static_cast<double>(z_.size() - 1);
}

namespace {
std::size_t nearest(double value, double origin, double step, std::size_t count) {
  const double t = std::round((value - origin) / step);
  if (t <= 0.0) return 0;
  const auto i = static_cast<std::size_t>(t);
  return std::min(i, count - 1);
}
}  // namespace

std::size_t Grid3D::nearest_ix(double x) const { return nearest(x, x_min_, hx(), n_); }
std::size_t Grid3D::nearest_iy(double y) const { return nearest(y, y_min_, hy(), n_); }
std::size_t Grid3D::nearest_iz(double z) const {
  if (z_.size() == 1) return 0;
  return nearest(z, z_.front(), hz(), z_.size());
}

bool Grid3D::same_transverse_lattice(const Grid3D& other) const {
  return n_ == other.n_ && x_min_ == other.x_min_ && x_max_ == other.x_max_ && y_min_ == other.y_min_ &&
         y_max_ == other.y_max_;
}

bool Grid3D::operator==(const Grid3D& other) const {
  return same_transverse_lattice(other) && z_ == other.z_;
}

GridPair make_grids(const GridConfig& c) {
  if (c.m < 2 || c.m1 < 2) throw ConfigError("grid: M and M1 must be at least 2");
  GridPair pair{
      Grid3D::uniform(c.x_min, c.x_max, c.y_min, c.y_max, c.n, c.scatterer_z_lo, c.scatterer_z_hi, c.m),
      Grid3D::uniform(c.x_min, c.x_max, c.y_min, c.y_max, c.n, c.receiver_z_lo, c.receiver_z_hi, c.m1)};
  const bool disjoint = c.receiver_z_lo > c.scatterer_z_hi || c.receiver_z_hi < c.scatterer_z_lo;
  if (!disjoint) throw ConfigError("grid: scatterer and receiver z-ranges overlap");
  return pair;
}

ComplexField::ComplexField(Grid3D g) : grid(std::move(g)), values(grid.node_count()) {}

ComplexField::ComplexField(Grid3D g, std::vector<cplx> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.node_count()) throw ConfigError("field: value count does not match grid");
}

std::span<cplx> ComplexField::slab(std::size_t iz) {
  return {values.data() + iz * grid.slab_size(), grid.slab_size()};
}
std::span<const cplx> ComplexField::slab(std::size_t iz) const {
  return {values.data() + iz * grid.slab_size(), grid.slab_size()};
}

bool ComplexField::all_finite() const {
  return std::all_of(values.begin(), values.end(),
                     [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

RealField::RealField(Grid3D g) : grid(std::move(g)), values(grid.node_count(), 0.0) {}

std::span<const double> RealField::slab(std::size_t iz) const {
  return {values.data() + iz * grid.slab_size(), grid.slab_size()};
}

SpectralField::SpectralField(Grid3D g) : grid(std::move(g)), values(grid.node_count()) {}

std::span<cplx> SpectralField::slab(std::size_t iz) {
  return {values.data() + iz * grid.slab_size(), grid.slab_size()};
}
std::span<const cplx> SpectralField::slab(std::size_t iz) const {
  return {values.data() + iz * grid.slab_size(), grid.slab_size()};
}

double l2_norm(const ComplexField& field) {
  const double s = simd::active_kernels().sum_abs2(field.values.data(), field.values.size());
  return std::sqrt(s * field.grid.cell_volume());
}

double l2_norm(const RealField& field) {
  const double s = simd::active_kernels().sum_sq(field.values.data(), field.values.size());
  return std::sqrt(s * field.grid.cell_volume());
}

double euclidean_norm(std::span<const cplx> values) {
  return std::sqrt(simd::active_kernels().sum_abs2(values.data(), values.size()));
}

RealField real_part(const ComplexField& field) {
  RealField out(field.grid);
  for (std::size_t i = 0; i < field.values.size(); ++i) out.values[i] = field.values[i].real();
  return out;
}

ComplexField to_complex(const RealField& field) {
  ComplexField out(field.grid);
  for (std::size_t i = 0; i < field.values.size(); ++i) out.values[i] = {field.values[i], 0.0};
  return out;
}

namespace {
constexpr char kMagic[4] = {'L', 'A', 'F', '1'};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
}  // namespace

void write_field(const std::filesystem::path& path, const ComplexField& field) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  const Grid3D& g = field.grid;
  os.write(kMagic, 4);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.n()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.n()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.mz()));
  for (double b : {g.x_min(), g.x_max(), g.y_min(), g.y_max(), g.z_min(), g.z_max()}) put<double>(os, b);
  os.write(reinterpret_cast<const char*>(field.values.data()),
           static_cast<std::streamsize>(field.values.size() * sizeof(cplx)));
  if (!os) throw IoError("write failed: " + path.string());
}

ComplexField read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw IoError("not a LAF1 field dump: " + path.string());
  const auto nx = get<std::uint32_t>(is);
  const auto ny = get<std::uint32_t>(is);
  const auto mz = get<std::uint32_t>(is);
  double b[6];
  for (double& v : b) v = get<double>(is);
  if (!is) throw IoError("truncated header: " + path.string());
  if (nx != ny) throw IoError("non-square transverse lattice in " + path.string());
  Grid3D grid;
  try {
    grid = Grid3D::uniform(b[0], b[1], b[2], b[3], nx, b[4], b[5], mz);
  } catch (const ConfigError& e) {
    throw IoError(std::string("invalid grid header in ") + path.string() + ": " + e.what());
  }
  ComplexField field(grid);
  is.read(reinterpret_cast<char*>(field.values.data()),
          static_cast<std::streamsize>(field.values.size() * sizeof(cplx)));
  if (!is) throw IoError("truncated payload: " + path.string());
  return field;
}

std::vector<std::filesystem::path> write_slice_csv(const std::filesystem::path& dir, const std::string& prefix,
                                                   const ComplexField& field) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const Grid3D& g = field.grid;
  for (std::size_t iz = 0; iz < g.mz(); ++iz) {
    std::ostringstream name;
    name << prefix << "_z" << std::setw(3) << std::setfill('0') << iz << ".csv";
    const auto path = dir / name.str();
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << std::setprecision(17) << "x,y,re,im\n";
    for (std::size_t iy = 0; iy < g.n(); ++iy) {
      for (std::size_t ix = 0; ix < g.n(); ++ix) {
        const cplx v = field.at(ix, iy, iz);
        os << g.x(ix) << ',' << g.y(iy) << ',' << v.real() << ',' << v.imag() << '\n';
      }
    }
    if (!os) throw IoError("write failed: " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace flatinv
