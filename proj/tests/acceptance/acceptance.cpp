// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "flatinv/config.hpp"
#include "flatinv/inverse.hpp"
#include "flatinv/metrics.hpp"
#include "flatinv/pipeline.hpp"
#include "oracles.hpp"

using namespace flatinv;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

const fs::path kConfigs = fs::path(FLATINV_SOURCE_DIR) / "configs";

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RunConfig desk_config(const std::string& name) {
  RunConfig c = load_config(kConfigs / "desk" / (name + ".json"));
  c.kernel_cache.enabled = false;
  return c;
}

// Everything one frequency of a run produces.
struct Reconstruction {
  std::vector<double> omegas;
  std::vector<FrequencyInversion> per_freq;
  RealField exact;
  std::size_t iterations = 0;
};

Reconstruction reconstruct(const RunConfig& c) {
  const GridPair grids = make_grids(c.grid);
  const SlabTransform transform(grids.scatterer);
  Reconstruction r;
  r.exact = c.phantom.sample(grids.scatterer);
  const RegularizerConfig reg = c.effective_regularizer();
  for (std::size_t i = 0; i < c.frequencies.size(); ++i) {
    const double omega = c.frequencies[i];
    const FrequencyOperators ops = prepare_frequency(c, grids, omega, transform);
    const ForwardResult fr = solve_forward(ops.u0_spec, *ops.op_xx, *ops.op_xy, r.exact, omega, transform, c.forward);
    if (!fr.converged) throw NumericalError("forward solve did not converge");
    r.iterations = fr.iterations;
    const ComplexField w = add_noise(fr.w_field, c.noise.delta, c.noise.seed + i);
    r.omegas.push_back(omega);
    r.per_freq.push_back(invert_frequency(w, ops.context(), transform, reg, c.inversion.division_epsilon));
  }
  return r;
}

double max_offset(const RealField& xi, const Phantom& p) {
  double worst = 0.0;
  for (const Localization& l : localization_report(xi, p)) worst = std::max(worst, l.offset);
  return worst;
}

std::string bytes_of(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome transform_correctness() {
  const auto t0 = Clock::now();
  const Grid3D g = Grid3D::uniform(-7.0, 9.0, -4.0, 4.0, 32, 0.0, 1.0, 3);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  ComplexField f(g);
  for (auto& v : f.values) v = {d(rng), d(rng)};
  const SlabTransform tr(g);
  const SpectralField s = forward_xy(tr, f);
  double dft_err = 0.0;
  for (std::size_t iz = 0; iz < g.mz(); ++iz) {
    const auto slab = f.slab(iz);
    const auto ref = oracle::naive_dft({slab.begin(), slab.end()}, 32, g.x_min(), g.y_min(), g.hx(), g.hy());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      num = std::max(num, std::abs(s.at(i, iz) - ref[i]));
      den = std::max(den, std::abs(ref[i]));
    }
    dft_err = std::max(dft_err, num / den);
  }
  const ComplexField back = inverse_xy(tr, s);
  double rt = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    rt = std::max(rt, std::abs(back.values[i] - f.values[i]));
    scale = std::max(scale, std::abs(f.values[i]));
  }
  rt /= scale;
  const double secs = seconds_since(t0);
  return {dft_err <= 1e-11 && rt <= 1e-12 && secs < 5.0,
          fmt("dft rel err %.2e (<=1e-11), round trip %.2e (<=1e-12), %.2f s", dft_err, rt, secs)};
}

Outcome kernel_oracle() {
  const auto t0 = Clock::now();
  const RunConfig c = desk_config("thick-exact");
  const GridPair g = make_grids(c.grid);
  const double omega = 2.0;
  const GreenKernelTable xx = build_green_kernel(g.scatterer, g.scatterer, omega);
  const GreenKernelTable xy = build_green_kernel(g.scatterer, g.receiver, omega);
  double worst_prop = 0.0;
  double worst_evan = 0.0;
  std::size_t checked = 0;
  const auto check_table = [&](const GreenKernelTable& t, std::vector<std::size_t> which) {
    for (std::size_t oi : which) {
      const double d = t.offsets[oi];
      for (std::size_t cls = 0; cls < t.classes.count(); ++cls) {
        const std::size_t m = t.classes.representative(cls);
        const double mag = t.lattice.magnitude(m);
        if (mag >= 1.5 * omega) continue;
        const cplx ref = oracle::green_spectrum_quadrature(d, t.lattice.omega1(m), t.lattice.omega2(m),
                                                           static_cast<long>(t.lattice.n()), t.lattice.hx(), omega);
        const double rel = std::abs(t.values[cls * t.offsets.size() + oi] - ref) / std::abs(ref);
        if (mag < omega) {
          worst_prop = std::max(worst_prop, rel);
          ++checked;
        } else {
          worst_evan = std::max(worst_evan, rel);
        }
      }
    }
  };
  const std::size_t nx = xx.offsets.size();
  const std::size_t ny = xy.offsets.size();
  check_table(xx, {0, 1, nx / 2, nx - 1});
  check_table(xy, {0, ny / 2, ny - 1});
  const double secs = seconds_since(t0);
  return {worst_prop <= 0.02 && checked > 0 && secs < 60.0,
          fmt("propagating max rel err %.3f%% over %zu mode/offset pairs (<=2%%), evanescent |Omega|<%.0f max %.2f%%, "
              "offsets %.2f..%.2f, %.1f s",
              100.0 * worst_prop, checked, 1.5 * omega, 100.0 * worst_evan, xx.offsets.front(), xy.offsets.back(),
              secs)};
}

Outcome regularizer_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<long> dim(1, 12);
  double worst_tsvd = 0.0;
  double worst_tik = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const long rows = dim(rng);
    const long cols = dim(rng);
    const MatrixC a = oracle::random_matrix(rng, rows, cols);
    const VectorC b = oracle::random_vector(rng, rows);
    const VectorC x = tsvd_solve(a, b, 1e-12).x;
    const VectorC ref = oracle::pinv_solve(a, b);
    worst_tsvd = std::max(worst_tsvd, (x - ref).norm() / std::max(1.0, ref.norm()));
    const double alpha = 1e-3;
    const VectorC xt = tikhonov_solve(a, b, alpha);
    const VectorC normal = (a.adjoint() * a + alpha * MatrixC::Identity(cols, cols)) * xt - a.adjoint() * b;
    worst_tik = std::max(worst_tik, normal.norm() / std::max(1e-300, (a.adjoint() * b).norm()));
  }
  const double secs = seconds_since(t0);
  return {worst_tsvd <= 1e-10 && worst_tik <= 1e-12 && secs < 10.0,
          fmt("tsvd vs pinv %.2e (<=1e-10), tikhonov normal residual %.2e (<=1e-12), %.2f s", worst_tsvd, worst_tik,
              secs)};
}

Outcome forward_solver() {
  const auto t0 = Clock::now();
  const RunConfig c = desk_config("thick-exact");
  const GridPair g = make_grids(c.grid);
  const SlabTransform transform(g.scatterer);
  const RealField xi = c.phantom.sample(g.scatterer);
  const RealField empty(g.scatterer);
  bool zero_ok = true;
  std::vector<std::size_t> iters;
  double worst_fp = 0.0;
  for (double omega : {1.0, 2.0, 3.0}) {
    const FrequencyOperators ops = prepare_frequency(c, g, omega, transform);
    if (omega == 1.0) {
      const ForwardResult z = born_iterate(ops.u0_spec, *ops.op_xx, empty, omega, transform, c.forward);
      zero_ok = z.converged && z.iterations == 1 && z.u_nu.values == ops.u0_spec.values;
    }
    const ForwardResult r = born_iterate(ops.u0_spec, *ops.op_xx, xi, omega, transform, c.forward);
    if (!r.converged) return {false, fmt("omega %g did not converge", omega)};
    iters.push_back(r.iterations);
    const SpectralField again = born_map(ops.u0_spec, r.u_nu, *ops.op_xx, xi, transform);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < again.values.size(); ++i) {
      num += std::norm(again.values[i] - r.u_nu.values[i]);
      den += std::norm(ops.u0_spec.values[i]);
    }
    worst_fp = std::max(worst_fp, std::sqrt(num / den));
  }
  const double secs = seconds_since(t0);
  const bool ordered = iters[0] < iters[1] && iters[1] < iters[2];
  return {zero_ok && ordered && worst_fp <= 10.0 * c.forward.tol && secs < 300.0,
          fmt("xi=0 one step: %s; iterations w=1/2/3: %zu/%zu/%zu; fixed-point residual %.2e (<=%.0e); %.1f s",
              zero_ok ? "yes" : "no", iters[0], iters[1], iters[2], worst_fp, 10.0 * c.forward.tol, secs)};
}

struct SharedRuns {
  Reconstruction thick;
  double thick_mean = 0.0;
  double thick_seconds = 0.0;
};

Outcome end_to_end(SharedRuns& runs) {
  const auto t0 = Clock::now();
  const RunConfig c = desk_config("thick-exact");
  runs.thick = reconstruct(c);
  runs.thick_seconds = seconds_since(t0);
  const RealField& xi = runs.thick.per_freq.front().xi.xi;
  const AccuracyCurve curve = slice_relative_error(xi, runs.thick.exact);
  runs.thick_mean = curve.mean();
  const double off = max_offset(xi, c.phantom);
  return {off <= 0.5 && runs.thick_mean < 1.0 && runs.thick_seconds < 600.0,
          fmt("max localization offset %.3f (<=0.5), mean delta %.4f (<1.0), %.1f s", off, runs.thick_mean,
              runs.thick_seconds)};
}

Outcome noise_ordering(const SharedRuns& runs) {
  const double e0 = runs.thick_mean;
  const double e7 = [] {
    const Reconstruction r = reconstruct(desk_config("thick-delta1e-7"));
    return slice_relative_error(r.per_freq.front().xi.xi, r.exact).mean();
  }();
  const double e5 = [] {
    const Reconstruction r = reconstruct(desk_config("thick-delta1e-5"));
    return slice_relative_error(r.per_freq.front().xi.xi, r.exact).mean();
  }();
  return {e0 <= e7 && e7 <= e5, fmt("mean delta: exact %.4f <= 1e-7 %.4f <= 1e-5 %.4f", e0, e7, e5)};
}

Outcome thin_layer(const SharedRuns& runs) {
  const RunConfig c = desk_config("thin-exact");
  const Reconstruction r = reconstruct(c);
  const RealField& xi = r.per_freq.front().xi.xi;
  const double thin = slice_relative_error(xi, r.exact).mean();
  const double off = max_offset(xi, c.phantom);
  return {thin > runs.thick_mean && off <= 0.5,
          fmt("thin (M1=%zu) mean delta %.4f > thick %.4f, max offset %.3f (<=0.5)", c.grid.m1, thin, runs.thick_mean,
              off)};
}

Outcome multi_frequency() {
  const RunConfig c = desk_config("three-frequency");
  const Reconstruction r = reconstruct(c);
  std::vector<ComplexField> vs;
  std::vector<ComplexField> us;
  std::vector<AccuracyCurve> curves;
  for (const FrequencyInversion& f : r.per_freq) {
    vs.push_back(f.v);
    us.push_back(f.u);
    curves.push_back(slice_relative_error(f.xi.xi, r.exact));
  }
  const XiEstimate ls = extract_xi_lsq(vs, us, c.inversion.division_epsilon);
  const AccuracyCurve lc = slice_relative_error(ls.xi, r.exact);
  std::size_t outside = 0;
  double worst_excess = 0.0;
  for (std::size_t s = 0; s < lc.delta.size(); ++s) {
    double lo = curves[0].delta[s];
    double hi = lo;
    for (const AccuracyCurve& cv : curves) {
      lo = std::min(lo, cv.delta[s]);
      hi = std::max(hi, cv.delta[s]);
    }
    const double d = lc.delta[s];
    if (d < 0.95 * lo || d > 1.05 * hi) {
      ++outside;
      worst_excess = std::max(worst_excess, d > hi ? d / hi - 1.0 : 1.0 - d / lo);
    }
  }
  std::string means;
  for (std::size_t i = 0; i < curves.size(); ++i) means += fmt(" w=%g %.4f", r.omegas[i], curves[i].mean());
  return {outside == 0 && !lc.empty(),
          fmt("LS slices outside [0.95 min, 1.05 max]: %zu of %zu (worst %.1f%%); mean LS %.4f vs%s", outside,
              lc.delta.size(), 100.0 * worst_excess, lc.mean(), means.c_str())};
}

Outcome timing_scaling() {
  RunConfig c = load_config(kConfigs / "bench.json");
  const fs::path out = fs::temp_directory_path() / "flatinv_acceptance_bench";
  fs::remove_all(out);
  const nlohmann::json m = run_bench(c, {32, 64, 128}, out);
  const double p = m.at("fit").at("exponent").get<double>();
  std::string times;
  for (const auto& r : m.at("records"))
    times += fmt(" N=%zu:%.2fs", r.at("n").get<std::size_t>(), r.at("seconds").get<double>());
  return {p >= 1.7 && p <= 2.4, fmt("exponent %.3f in [1.7, 2.4] at M=M1=%zu;%s", p, c.grid.m, times.c_str())};
}

Outcome determinism() {
  RunConfig c = desk_config("thick-delta1e-7");
  const fs::path a = fs::temp_directory_path() / "flatinv_acceptance_det_a";
  const fs::path b = fs::temp_directory_path() / "flatinv_acceptance_det_b";
  std::size_t compared = 0;
  bool same = true;
  for (const fs::path& dir : {a, b}) {
    fs::remove_all(dir);
    c.output = dir;
    run_synthesize(c, dir);
    run_invert(c, dir, dir);
  }
  for (const char* name : {"W_w2.laf", "xi_w2.laf", "V_w2.laf"}) {
    same = same && bytes_of(a / name) == bytes_of(b / name) && !bytes_of(a / name).empty();
    ++compared;
  }
  const auto ma = read_manifest(a / "invert.manifest.json").at("files");
  const auto mb = read_manifest(b / "invert.manifest.json").at("files");
  same = same && ma == mb;
  return {same, fmt("%zu dumps byte-identical and invert checksums equal across two runs: %s", compared,
                    same ? "yes" : "no")};
}

}  // namespace

int main() {
  SharedRuns runs;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"transform correctness", transform_correctness},
      {"green kernel oracle", kernel_oracle},
      {"regularizer oracle equivalence", regularizer_oracle},
      {"forward solver", forward_solver},
      {"end-to-end exact thick layer", [&] { return end_to_end(runs); }},
      {"noise sensitivity ordering", [&] { return noise_ordering(runs); }},
      {"thin layer comparison", [&] { return thin_layer(runs); }},
      {"multi-frequency envelope", multi_frequency},
      {"timing scaling", timing_scaling},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %zu %s: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
