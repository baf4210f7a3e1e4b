#pragma once

#include <string>
#include <vector>

#include "flatinv/field.hpp"
#include "flatinv/medium.hpp"

namespace flatinv {

/// Slices whose exact norm is below this fraction of the largest slice norm
/// count as unsupported.
inline constexpr double kSupportFloor = 1e-10;

/// Per-slice relative error ||appr - exact||_xy / ||exact||_xy on the
/// supported slices.
struct AccuracyCurve {
  std::vector<double> z;
  std::vector<double> delta;
  std::string warning;

  double mean() const;
  bool empty() const { return z.empty(); }
};

AccuracyCurve slice_relative_error(const RealField& appr, const RealField& exact);

struct Localization {
  Point3 true_center;
  Point3 found;
  double offset = 0.0;
  double peak = 0.0;
};

/// For each bump centre, the node of maximal `appr` inside a ball of
/// `radius` around it.
std::vector<Localization> localization_report(const RealField& appr, const Phantom& phantom, double radius = 1.0);

struct TimingRecord {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t m1 = 0;
  double seconds = 0.0;
};

struct TimingFit {
  double exponent = 0.0;
  double t0 = 0.0;
};

/// Least-squares fit of log t = log t0 + p log N. Needs at least two records
/// at two distinct N; throws ConfigError otherwise.
TimingFit timing_fit(const std::vector<TimingRecord>& records);

}  // namespace flatinv
