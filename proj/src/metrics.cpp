#include "flatinv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace flatinv {

double AccuracyCurve::mean() const {
  if (delta.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(delta.begin(), delta.end(), 0.0) / static_cast<double>(delta.size());
}

AccuracyCurve slice_relative_error(const RealField& appr, const RealField& exact) {
  if (!(appr.grid == exact.grid)) throw ConfigError("slice_relative_error: grids differ");
  AccuracyCurve curve;
  const Grid3D& g = exact.grid;
  std::vector<double> num(g.mz(), 0.0);
  std::vector<double> den(g.mz(), 0.0);
  for (std::size_t iz = 0; iz < g.mz(); ++iz) {
    const auto a = appr.slab(iz);
    const auto e = exact.slab(iz);
    for (std::size_t i = 0; i < e.size(); ++i) {
      num[iz] += (a[i] - e[i]) * (a[i] - e[i]);
      den[iz] += e[i] * e[i];
    }
  }
  // slices tangent to the support carry only rounding residue
  const double floor = kSupportFloor * kSupportFloor * *std::max_element(den.begin(), den.end());
  for (std::size_t iz = 0; iz < g.mz(); ++iz) {
    if (den[iz] == 0.0 || den[iz] <= floor) continue;
    curve.z.push_back(g.z(iz));
    curve.delta.push_back(std::sqrt(num[iz] / den[iz]));
  }
  if (curve.z.empty()) curve.warning = "exact field vanishes on every slice";
  return curve;
}

std::vector<Localization> localization_report(const RealField& appr, const Phantom& phantom, double radius) {
  const Grid3D& g = appr.grid;
  std::vector<Localization> out;
  for (const Bump& bump : phantom.bumps) {
    Localization loc;
    loc.true_center = bump.center;
    loc.peak = -std::numeric_limits<double>::infinity();
    bool seen = false;
    for (std::size_t iz = 0; iz < g.mz(); ++iz) {
      for (std::size_t iy = 0; iy < g.n(); ++iy) {
        for (std::size_t ix = 0; ix < g.n(); ++ix) {
          const Point3 p{g.x(ix), g.y(iy), g.z(iz)};
          if (distance(p, bump.center) > radius) continue;
          const double v = appr.at(ix, iy, iz);
          // ties resolve towards the node closest to the centre
          if (!seen || v > loc.peak ||
              (v == loc.peak && distance(p, bump.center) < distance(loc.found, bump.center))) {
            loc.peak = v;
            loc.found = p;
            seen = true;
          }
        }
      }
    }
    if (!seen) {
      loc.peak = std::numeric_limits<double>::quiet_NaN();
      loc.offset = std::numeric_limits<double>::infinity();
    } else {
      loc.offset = distance(loc.found, bump.center);
    }
    out.push_back(loc);
  }
  return out;
}

TimingFit timing_fit(const std::vector<TimingRecord>& records) {
  if (records.size() < 2) throw ConfigError("timing_fit: need at least two records");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const TimingRecord& r : records) {
    if (!(r.seconds > 0.0) || r.n == 0) throw ConfigError("timing_fit: records need positive N and time");
    if (r.m != records.front().m || r.m1 != records.front().m1)
      throw ConfigError("timing_fit: records must share M and M1");
    const double x = std::log(static_cast<double>(r.n));
    const double y = std::log(r.seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(records.size());
  const double var = sxx - sx * sx / n;
  if (!(var > 0.0)) throw ConfigError("timing_fit: records need at least two distinct N");
  TimingFit fit;
  fit.exponent = (sxy - sx * sy / n) / var;
  fit.t0 = std::exp((sy - fit.exponent * sx) / n);
  return fit;
}

}  // namespace flatinv
