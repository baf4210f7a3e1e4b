#include "flatinv/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "flatinv/metrics.hpp"

namespace flatinv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

// Bumped whenever the kernel construction changes, so stale cache entries miss.
constexpr const char* kKernelScheme = "gregory3-axis1";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os.precision(17);
  return os;
}

json grid_json(const Grid3D& g) {
  return json{{"x", {g.x_min(), g.x_max()}}, {"y", {g.y_min(), g.y_max()}}, {"n", g.n()},
              {"z", {g.z_min(), g.z_max()}}, {"mz", g.mz()}};
}

/// Records every file under `out` written by this stage.
class Inventory {
 public:
  explicit Inventory(fs::path root) : root_(std::move(root)) {}
  void add(const fs::path& path) {
    files_[fs::relative(path, root_).generic_string()] =
        json{{"sha256", sha256_file(path)}, {"bytes", fs::file_size(path)}};
  }
  json to_json() const {
    json j = json::object();
    for (const auto& [k, v] : files_) j[k] = v;
    return j;
  }

 private:
  fs::path root_;
  std::map<std::string, json> files_;
};

json base_manifest(const char* stage, const RunConfig& config) {
  return json{{"stage", stage},
              {"tool", "flatinv"},
              {"version", kToolVersion},
              {"config_hash", config_hash(config)},
              {"config", to_json(config)}};
}

void write_manifest(const fs::path& out, const char* stage, json& manifest, const Inventory& files) {
  manifest["files"] = files.to_json();
  std::ofstream os = open_out(out / (std::string(stage) + ".manifest.json"));
  os << manifest.dump(2) << '\n';
  if (!os) throw IoError("failed writing manifest in " + out.string());
}

void write_real(const fs::path& path, const RealField& field, Inventory& files) {
  write_field(path, to_complex(field));
  files.add(path);
}

void write_slices(const fs::path& out, const std::string& prefix, const RealField& field, Inventory& files) {
  for (const fs::path& p : write_slice_csv(out / "slices", prefix, to_complex(field))) files.add(p);
}

GridConfig grid_from_json(const json& j) {
  json wrapper{{"grid", j}};
  return parse_config(wrapper).grid;
}

bool same_grid(const GridConfig& a, const GridConfig& b) {
  return a.x_min == b.x_min && a.x_max == b.x_max && a.y_min == b.y_min && a.y_max == b.y_max && a.n == b.n &&
         a.scatterer_z_lo == b.scatterer_z_lo && a.scatterer_z_hi == b.scatterer_z_hi && a.m == b.m &&
         a.receiver_z_lo == b.receiver_z_lo && a.receiver_z_hi == b.receiver_z_hi && a.m1 == b.m1;
}

double mean_rank(const std::vector<std::size_t>& ranks) {
  if (ranks.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t r : ranks) s += static_cast<double>(r);
  return s / static_cast<double>(ranks.size());
}

void write_rank_histogram(const fs::path& path, const std::vector<std::size_t>& ranks, Inventory& files) {
  std::map<std::size_t, std::size_t> hist;
  for (std::size_t r : ranks) ++hist[r];
  std::ofstream os = open_out(path);
  os << "rank,count\n";
  for (const auto& [r, c] : hist) os << r << ',' << c << '\n';
  os.close();
  files.add(path);
}

void write_spectrum(const fs::path& path, const FrequencyInversion& inv, const GreenKernelTable& table,
                    Inventory& files) {
  std::ofstream os = open_out(path);
  os << "class,mode,k1,k2,omega_abs";
  const std::size_t width = inv.class_sigma.empty() ? 0 : static_cast<std::size_t>(inv.class_sigma.front().size());
  for (std::size_t i = 0; i < width; ++i) os << ",sigma_" << (i + 1);
  os << '\n';
  for (std::size_t c = 0; c < inv.class_sigma.size(); ++c) {
    const std::size_t rep = table.classes.representative(c);
    os << c << ',' << rep << ',' << table.lattice.k1(rep) << ',' << table.lattice.k2(rep) << ','
       << table.lattice.magnitude(rep);
    for (Eigen::Index i = 0; i < inv.class_sigma[c].size(); ++i) os << ',' << inv.class_sigma[c](i);
    os << '\n';
  }
  os.close();
  files.add(path);
}

std::string cache_key(const Grid3D& source, const Grid3D& receiver, double omega, double c0) {
  const json key{{"source", grid_json(source)}, {"receiver", grid_json(receiver)}, {"omega", omega}, {"c0", c0},
                 {"scheme", kKernelScheme}};
  return sha256_hex(key.dump()).substr(0, 24);
}

}  // namespace

std::string frequency_tag(double omega) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "w%g", omega);
  std::string tag(buf);
  for (char& ch : tag)
    if (ch == '.') ch = 'p';
  return tag;
}

GreenKernelTable cached_green_kernel(const fs::path& cache_dir, const Grid3D& source, const Grid3D& receiver,
                                     double omega, double c0) {
  if (cache_dir.empty()) return build_green_kernel(source, receiver, omega, c0);
  const fs::path path = cache_dir / ("G_" + cache_key(source, receiver, omega, c0) + ".laf");
  if (fs::exists(path)) {
    GreenKernelTable t = build_kernel_geometry(source, receiver, omega, c0);
    try {
      load_kernel_values(path, t);
      return t;
    } catch (const IoError&) {
      // unreadable entry: rebuilt below
    }
  }
  GreenKernelTable t = build_green_kernel(source, receiver, omega, c0);
  ensure_dir(cache_dir);
  const fs::path tmp = path.string() + ".tmp";
  save_kernel_table(tmp, t);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot store kernel cache " + path.string() + ": " + ec.message());
  return t;
}

FrequencyOperators prepare_frequency(const RunConfig& config, const GridPair& grids, double omega,
                                     const SlabTransform& transform) {
  const fs::path cache = config.kernel_cache.enabled ? config.cache_dir() : fs::path{};
  FrequencyOperators ops;
  ops.omega = omega;
  ops.kernel_xx = cached_green_kernel(cache, grids.scatterer, grids.scatterer, omega, config.c0);
  ops.kernel_xy = cached_green_kernel(cache, grids.scatterer, grids.receiver, omega, config.c0);
  ops.op_xx = std::make_unique<KernelOperator>(ops.kernel_xx);
  ops.op_xy = std::make_unique<KernelOperator>(ops.kernel_xy);
  ops.u0_spec = incident_field_spectral(config.sources, grids.scatterer, omega, transform, config.c0);
  return ops;
}

json read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("corrupt manifest " + path.string() + ": " + e.what());
  }
}

json run_phantom(const RunConfig& config, const fs::path& out) {
  ensure_dir(out);
  const GridPair grids = make_grids(config.grid);
  const RealField xi = config.phantom.sample(grids.scatterer);
  Inventory files(out);
  write_real(out / "xi_exact.laf", xi, files);
  write_slices(out, "xi_exact", xi, files);
  json manifest = base_manifest("phantom", config);
  manifest["max_xi"] = config.phantom.max_value();
  manifest["contrast"] = contrast(config.phantom, config.c0);
  write_manifest(out, "phantom", manifest, files);
  return manifest;
}

json run_synthesize(const RunConfig& config, const fs::path& out) {
  config.validate();
  ensure_dir(out);
  const auto t_start = Clock::now();
  const GridPair grids = make_grids(config.grid);
  const SlabTransform transform(grids.scatterer);
  const RealField xi = config.phantom.sample(grids.scatterer);
  Inventory files(out);
  json manifest = base_manifest("synthesize", config);
  json freqs = json::array();
  double t_kernels = 0.0;
  double t_forward = 0.0;
  for (std::size_t i = 0; i < config.frequencies.size(); ++i) {
    const double omega = config.frequencies[i];
    const std::string tag = frequency_tag(omega);
    auto t0 = Clock::now();
    const FrequencyOperators ops = prepare_frequency(config, grids, omega, transform);
    t_kernels += seconds_since(t0);
    t0 = Clock::now();
    const ForwardResult fr = solve_forward(ops.u0_spec, *ops.op_xx, *ops.op_xy, xi, omega, transform, config.forward);
    t_forward += seconds_since(t0);
    if (!fr.converged)
      throw DivergenceError("forward iteration did not converge within max_iter = " +
                                std::to_string(config.forward.max_iter),
                            omega);
    const std::uint64_t seed = config.noise.seed + i;
    const ComplexField w = add_noise(fr.w_field, config.noise.delta, seed);
    const fs::path w_path = out / ("W_" + tag + ".laf");
    write_field(w_path, w);
    files.add(w_path);
    const fs::path r_path = out / ("residuals_" + tag + ".csv");
    {
      std::ofstream os = open_out(r_path);
      os << "iteration,residual\n";
      for (std::size_t k = 0; k < fr.residual_history.size(); ++k) os << (k + 1) << ',' << fr.residual_history[k] << '\n';
    }
    files.add(r_path);
    freqs.push_back({{"omega", omega},
                     {"tag", tag},
                     {"file", w_path.filename().string()},
                     {"iterations", fr.iterations},
                     {"converged", fr.converged},
                     {"final_residual", fr.residual_history.empty() ? 0.0 : fr.residual_history.back()},
                     {"noise_seed", seed},
                     {"w_norm", l2_norm(fr.w_field)}});
  }
  manifest["grid"] = to_json(config.grid);
  manifest["delta"] = config.noise.delta;
  manifest["frequencies"] = freqs;
  manifest["timings"] = {{"kernels_s", t_kernels}, {"forward_s", t_forward}, {"total_s", seconds_since(t_start)}};
  write_manifest(out, "synthesize", manifest, files);
  return manifest;
}

json run_invert(const RunConfig& config, const fs::path& data_dir, const fs::path& out) {
  config.validate();
  const fs::path data_manifest_path = data_dir / "synthesize.manifest.json";
  const json data_manifest = read_manifest(data_manifest_path);
  if (!data_manifest.contains("grid") || !data_manifest.contains("frequencies"))
    throw IoError("manifest lacks grid or frequencies: " + data_manifest_path.string());
  if (!same_grid(grid_from_json(data_manifest.at("grid")), config.grid))
    throw ConfigError("invert: data grids do not match the config grids");
  const GridPair grids = make_grids(config.grid);

  struct Input {
    double omega;
    std::string tag;
    ComplexField w;
  };
  std::vector<Input> inputs;
  for (double omega : config.frequencies) {
    const json* entry = nullptr;
    for (const json& f : data_manifest.at("frequencies"))
      if (f.at("omega").get<double>() == omega) entry = &f;
    if (entry == nullptr) throw ConfigError("invert: no data for omega = " + std::to_string(omega));
    ComplexField w = read_field(data_dir / entry->at("file").get<std::string>());
    if (!(w.grid == grids.receiver)) throw ConfigError("invert: data dump is not on the receiver grid");
    inputs.push_back({omega, frequency_tag(omega), std::move(w)});
  }

  ensure_dir(out);
  const auto t_start = Clock::now();
  const SlabTransform transform(grids.scatterer);
  const RegularizerConfig reg = config.effective_regularizer();
  const double eps = config.inversion.division_epsilon;
  Inventory files(out);
  json manifest = base_manifest("invert", config);
  manifest["data_manifest_sha256"] = sha256_file(data_manifest_path);
  manifest["regularizer"] = {{"method", to_string(reg.method)},
                             {"policy", to_string(reg.policy)},
                             {"reference", to_string(reg.reference)},
                             {"noise_level", reg.noise_level}};

  std::ofstream diag = open_out(out / "diagnostics.csv");
  diag << "tag,omega,imag_norm,masked_fraction,failed_modes,zero_rank_modes,capped_modes,mean_rank,sigma_ref,mode_target\n";
  json results = json::array();
  std::vector<ComplexField> vs;
  std::vector<ComplexField> us;
  for (const Input& in : inputs) {
    const auto t0 = Clock::now();
    const FrequencyOperators ops = prepare_frequency(config, grids, in.omega, transform);
    FrequencyInversion inv = invert_frequency(in.w, ops.context(), transform, reg, eps);
    const double elapsed = seconds_since(t0);
    write_real(out / ("xi_" + in.tag + ".laf"), inv.xi.xi, files);
    write_field(out / ("V_" + in.tag + ".laf"), inv.v);
    files.add(out / ("V_" + in.tag + ".laf"));
    write_field(out / ("u_" + in.tag + ".laf"), inv.u);
    files.add(out / ("u_" + in.tag + ".laf"));
    write_slices(out, "xi_" + in.tag, inv.xi.xi, files);
    write_rank_histogram(out / ("ranks_" + in.tag + ".csv"), inv.stats.ranks, files);
    write_spectrum(out / ("spectrum_" + in.tag + ".csv"), inv, ops.kernel_xy, files);
    diag << in.tag << ',' << in.omega << ',' << inv.xi.imag_norm << ',' << inv.xi.masked_fraction << ','
         << inv.stats.failed_modes << ',' << inv.stats.zero_rank_modes << ',' << inv.stats.capped_modes << ','
         << mean_rank(inv.stats.ranks) << ','
         << inv.stats.sigma_ref << ',' << inv.stats.mode_target << '\n';
    results.push_back({{"tag", in.tag},
                       {"omega", in.omega},
                       {"file", "xi_" + in.tag + ".laf"},
                       {"failed_modes", inv.stats.failed_modes},
                       {"zero_rank_modes", inv.stats.zero_rank_modes},
                       {"capped_modes", inv.stats.capped_modes},
                       {"mean_rank", mean_rank(inv.stats.ranks)},
                       {"imag_norm", inv.xi.imag_norm},
                       {"masked_fraction", inv.xi.masked_fraction},
                       {"seconds", elapsed}});
    vs.push_back(std::move(inv.v));
    us.push_back(std::move(inv.u));
  }
  if (inputs.size() > 1 && config.inversion.combine) {
    const XiEstimate ls = extract_xi_lsq(vs, us, eps);
    write_real(out / "xi_ls.laf", ls.xi, files);
    write_slices(out, "xi_ls", ls.xi, files);
    diag << "ls,0," << ls.imag_norm << ',' << ls.masked_fraction << ",,,,,,\n";
    results.push_back({{"tag", "ls"},
                       {"file", "xi_ls.laf"},
                       {"imag_norm", ls.imag_norm},
                       {"masked_fraction", ls.masked_fraction}});
  }
  diag.close();
  if (!diag) throw IoError("failed writing diagnostics in " + out.string());
  files.add(out / "diagnostics.csv");
  manifest["results"] = results;
  manifest["timings"] = {{"total_s", seconds_since(t_start)}};
  write_manifest(out, "invert", manifest, files);
  return manifest;
}

json run_evaluate(const RunConfig& config, const fs::path& inversion_dir, const fs::path& out) {
  config.validate();
  const json inv_manifest = read_manifest(inversion_dir / "invert.manifest.json");
  const GridPair grids = make_grids(config.grid);
  const RealField exact = config.phantom.sample(grids.scatterer);
  ensure_dir(out);
  Inventory files(out);
  json manifest = base_manifest("evaluate", config);
  json evaluations = json::array();
  for (const json& r : inv_manifest.at("results")) {
    const std::string tag = r.at("tag").get<std::string>();
    const ComplexField dump = read_field(inversion_dir / r.at("file").get<std::string>());
    if (!(dump.grid == grids.scatterer)) throw ConfigError("evaluate: reconstruction is not on the scatterer grid");
    const RealField appr = real_part(dump);
    const AccuracyCurve curve = slice_relative_error(appr, exact);
    const fs::path acc_path = out / ("accuracy_" + tag + ".csv");
    {
      std::ofstream os = open_out(acc_path);
      os << "z,delta\n";
      for (std::size_t i = 0; i < curve.z.size(); ++i) os << curve.z[i] << ',' << curve.delta[i] << '\n';
    }
    files.add(acc_path);
    const auto locs = localization_report(appr, config.phantom);
    const fs::path loc_path = out / ("localization_" + tag + ".csv");
    double max_offset = 0.0;
    {
      std::ofstream os = open_out(loc_path);
      os << "bump,true_x,true_y,true_z,found_x,found_y,found_z,offset,peak\n";
      for (std::size_t b = 0; b < locs.size(); ++b) {
        const Localization& l = locs[b];
        os << b << ',' << l.true_center.x << ',' << l.true_center.y << ',' << l.true_center.z << ',' << l.found.x << ','
           << l.found.y << ',' << l.found.z << ',' << l.offset << ',' << l.peak << '\n';
        max_offset = std::max(max_offset, l.offset);
      }
    }
    files.add(loc_path);
    json e{{"tag", tag}, {"max_offset", max_offset}};
    if (curve.empty()) {
      e["warning"] = curve.warning;
    } else {
      e["mean_delta"] = curve.mean();
    }
    evaluations.push_back(e);
  }
  manifest["evaluations"] = evaluations;
  write_manifest(out, "evaluate", manifest, files);
  return manifest;
}

json run_bench(const RunConfig& config, const std::vector<std::size_t>& sizes, const fs::path& out) {
  config.validate();
  if (sizes.empty()) throw ConfigError("bench: empty size list");
  ensure_dir(out);
  const double omega = config.frequencies.front();
  const RegularizerConfig reg = config.effective_regularizer();
  std::vector<TimingRecord> records;
  for (std::size_t n : sizes) {
    RunConfig sized = config;
    sized.grid.n = n;
    sized.kernel_cache.enabled = false;
    sized.validate();
    const GridPair grids = make_grids(sized.grid);
    const SlabTransform transform(grids.scatterer);
    const RealField xi = sized.phantom.sample(grids.scatterer);
    ComplexField w;
    {
      const FrequencyOperators ops = prepare_frequency(sized, grids, omega, transform);
      w = add_noise(solve_forward(ops.u0_spec, *ops.op_xx, *ops.op_xy, xi, omega, transform, sized.forward).w_field,
                    sized.noise.delta, sized.noise.seed);
    }
    const auto t0 = Clock::now();
    const FrequencyOperators ops = prepare_frequency(sized, grids, omega, transform);
    const FrequencyInversion inv = invert_frequency(w, ops.context(), transform, reg, sized.inversion.division_epsilon);
    records.push_back({n, sized.grid.m, sized.grid.m1, seconds_since(t0)});
  }
  Inventory files(out);
  const fs::path t_path = out / "timing.csv";
  {
    std::ofstream os = open_out(t_path);
    os << "n,m,m1,seconds\n";
    for (const TimingRecord& r : records) os << r.n << ',' << r.m << ',' << r.m1 << ',' << r.seconds << '\n';
  }
  files.add(t_path);
  json manifest = base_manifest("bench", config);
  json recs = json::array();
  for (const TimingRecord& r : records) recs.push_back({{"n", r.n}, {"m", r.m}, {"m1", r.m1}, {"seconds", r.seconds}});
  manifest["records"] = recs;
  manifest["omega"] = omega;
  if (records.size() >= 2) {
    const TimingFit fit = timing_fit(records);
    manifest["fit"] = {{"exponent", fit.exponent}, {"t0", fit.t0}};
  }
  write_manifest(out, "bench", manifest, files);
  return manifest;
}

}  // namespace flatinv
