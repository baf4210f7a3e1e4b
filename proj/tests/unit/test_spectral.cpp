#include "doctest.h"

#include <cmath>
#include <random>

#include "flatinv/spectral.hpp"
#include "oracles.hpp"

using namespace flatinv;

namespace {

ComplexField random_field(const Grid3D& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  ComplexField f(g);
  for (auto& v : f.values) v = {dist(rng), dist(rng)};
  return f;
}

double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const cplx& x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("mode lattice frequencies and symmetry") {
  const Grid3D g = Grid3D::uniform(-10.0, 10.0, -10.0, 10.0, 16, 0.0, 0.0, 1);
  const ModeLattice lat(g);
  const double step = 2.0 * oracle::kPi / 20.0;
  CHECK(lat.d_omega1() == doctest::Approx(step));
  for (std::size_t m = 0; m < lat.size(); ++m) {
    CHECK(lat.k1(m) >= -8);
    CHECK(lat.k1(m) < 8);
    CHECK(lat.omega1(m) == doctest::Approx(step * static_cast<double>(lat.k1(m))));
    CHECK(lat.omega2(m) == doctest::Approx(step * static_cast<double>(lat.k2(m))));
    const std::size_t mm = lat.mirror(m);
    if (lat.k1(m) != -8 && lat.k2(m) != -8) {
      CHECK(lat.omega1(mm) == doctest::Approx(-lat.omega1(m)));
      CHECK(lat.omega2(mm) == doctest::Approx(-lat.omega2(m)));
    }
  }
}

TEST_CASE("constant slab concentrates at the zero mode") {
  const Grid3D g = Grid3D::uniform(-3.0, 5.0, -2.0, 2.0, 16, 0.0, 0.0, 1);
  ComplexField f(g);
  const cplx c{1.5, -0.5};
  for (auto& v : f.values) v = c;
  const SpectralField s = forward_xy(f);
  const cplx dc = c * (16 * g.hx()) * (16 * g.hy());
  CHECK(std::abs(s.at(0, 0) - dc) <= 1e-12 * std::abs(dc));
  for (std::size_t m = 1; m < s.mode_count(); ++m) CHECK(std::abs(s.at(m, 0)) <= 1e-12 * std::abs(dc));
}

TEST_CASE("conjugate plane wave maps to a single mode") {
  const Grid3D g = Grid3D::uniform(-10.0, 10.0, -10.0, 10.0, 32, 0.0, 0.0, 1);
  const ModeLattice lat(g);
  const std::size_t target = lat.mode(3, 32 - 5);
  const double w1 = lat.omega1(target);
  const double w2 = lat.omega2(target);
  ComplexField f(g);
  for (std::size_t iy = 0; iy < g.n(); ++iy)
    for (std::size_t ix = 0; ix < g.n(); ++ix) f.at(ix, iy, 0) = std::polar(1.0, -(w1 * g.x(ix) + w2 * g.y(iy)));
  const SpectralField s = forward_xy(f);
  const double area = 20.0 * 20.0;
  CHECK(std::abs(s.at(target, 0) - area) <= 1e-11 * area);
  for (std::size_t m = 0; m < s.mode_count(); ++m)
    if (m != target) CHECK(std::abs(s.at(m, 0)) <= 1e-11 * area);
}

TEST_CASE("forward transform matches the direct DFT") {
  const Grid3D g = Grid3D::uniform(-7.0, 9.0, -4.0, 4.0, 32, 0.0, 0.5, 2);
  const ComplexField f = random_field(g, 3);
  const SpectralField s = forward_xy(f);
  for (std::size_t iz = 0; iz < g.mz(); ++iz) {
    const auto slab = f.slab(iz);
    const std::vector<cplx> in(slab.begin(), slab.end());
    const auto ref = oracle::naive_dft(in, 32, g.x_min(), g.y_min(), g.hx(), g.hy());
    const auto got = s.slab(iz);
    CHECK(max_diff(std::vector<cplx>(got.begin(), got.end()), ref) <= 1e-11 * max_abs(ref));
  }
}

TEST_CASE("round trip, zero spectrum, linearity") {
  const Grid3D g = Grid3D::uniform(-10.0, 10.0, -10.0, 10.0, 64, 0.0, 1.0, 3);
  const ComplexField f = random_field(g, 7);
  const ComplexField h = random_field(g, 8);
  const SlabTransform tr(g);
  const ComplexField back = inverse_xy(tr, forward_xy(tr, f));
  CHECK(max_diff(back.values, f.values) <= 1e-12 * max_abs(f.values));

  const ComplexField z = inverse_xy(tr, SpectralField(g));
  CHECK(max_abs(z.values) == 0.0);

  const cplx a{0.7, -1.2};
  const cplx b{-2.0, 0.1};
  ComplexField combo(g);
  for (std::size_t i = 0; i < combo.values.size(); ++i) combo.values[i] = a * f.values[i] + b * h.values[i];
  const SpectralField sf = forward_xy(tr, f);
  const SpectralField sh = forward_xy(tr, h);
  const SpectralField sc = forward_xy(tr, combo);
  std::vector<cplx> expect(sc.values.size());
  for (std::size_t i = 0; i < expect.size(); ++i) expect[i] = a * sf.values[i] + b * sh.values[i];
  CHECK(max_diff(sc.values, expect) <= 1e-12 * max_abs(expect));
}

TEST_CASE("single-mode spectrum inverts to the analytic plane wave") {
  const Grid3D g = Grid3D::uniform(-6.0, 10.0, -8.0, 8.0, 32, 0.0, 0.0, 1);
  const ModeLattice lat(g);
  const std::size_t m = lat.mode(5, 30);
  SpectralField s(g);
  s.at(m, 0) = {2.0, 1.0};
  const ComplexField f = inverse_xy(s);
  const double scale = 1.0 / (32.0 * 32.0 * g.hx() * g.hy());
  double err = 0.0;
  for (std::size_t iy = 0; iy < g.n(); ++iy)
    for (std::size_t ix = 0; ix < g.n(); ++ix) {
      const cplx expect =
          cplx{2.0, 1.0} * scale * std::polar(1.0, -(lat.omega1(m) * g.x(ix) + lat.omega2(m) * g.y(iy)));
      err = std::max(err, std::abs(f.at(ix, iy, 0) - expect));
    }
  CHECK(err <= 1e-12 * std::abs(cplx{2.0, 1.0}) * scale);
}

TEST_CASE("real slabs have conjugate-symmetric spectra") {
  const Grid3D g = Grid3D::uniform(-10.0, 10.0, -10.0, 10.0, 32, 0.0, 0.0, 1);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexField f(g);
  for (auto& v : f.values) v = {u(rng), 0.0};
  const SpectralField s = forward_xy(f);
  const ModeLattice lat(g);
  // the Nyquist row and column map to themselves and carry a phase; skipped
  double err = 0.0;
  for (std::size_t m = 0; m < lat.size(); ++m)
    if (lat.k1(m) != -16 && lat.k2(m) != -16) err = std::max(err, std::abs(s.at(lat.mirror(m), 0) - std::conj(s.at(m, 0))));
  CHECK(err <= 1e-12 * max_abs(s.values));
}

TEST_CASE("Parseval identity under continuous scaling") {
  const Grid3D g = Grid3D::uniform(-3.0, 3.0, -3.0, 3.0, 32, 0.0, 0.0, 1);
  const ComplexField f = random_field(g, 21);
  const SpectralField s = forward_xy(f);
  double lhs = 0.0;
  double rhs = 0.0;
  for (const cplx& v : f.values) lhs += std::norm(v);
  for (const cplx& v : s.values) rhs += std::norm(v);
  lhs *= g.hx() * g.hy();
  const ModeLattice lat(g);
  rhs *= lat.d_omega1() * lat.d_omega2() / (4.0 * oracle::kPi * oracle::kPi);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * lhs);
}
