#include "flatinv/config.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace flatinv {

using nlohmann::json;

namespace {

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::array<double, 2> range_of(const json& j, const char* key, std::array<double, 2> fallback) {
  const auto r = get_or<std::vector<double>>(j, key, {fallback[0], fallback[1]});
  if (r.size() != 2) throw ConfigError(std::string("config key '") + key + "' needs two numbers");
  return {r[0], r[1]};
}

Point3 point_of(const json& j, const char* key) {
  const auto p = get_or<std::vector<double>>(j, key, {});
  if (p.size() != 3) throw ConfigError(std::string("config key '") + key + "' needs three numbers");
  return {p[0], p[1], p[2]};
}

cplx complex_of(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError("amplitude must be a number or [re, im]");
}

GridConfig parse_grid(const json& j) {
  check_keys(j, "grid", {"x", "y", "n", "scatterer_z", "m", "receiver_z", "m1"});
  GridConfig g;
  const auto x = range_of(j, "x", {g.x_min, g.x_max});
  const auto y = range_of(j, "y", {g.y_min, g.y_max});
  const auto sz = range_of(j, "scatterer_z", {g.scatterer_z_lo, g.scatterer_z_hi});
  const auto rz = range_of(j, "receiver_z", {g.receiver_z_lo, g.receiver_z_hi});
  g.x_min = x[0];
  g.x_max = x[1];
  g.y_min = y[0];
  g.y_max = y[1];
  g.scatterer_z_lo = sz[0];
  g.scatterer_z_hi = sz[1];
  g.receiver_z_lo = rz[0];
  g.receiver_z_hi = rz[1];
  g.n = get_or<std::size_t>(j, "n", g.n);
  g.m = get_or<std::size_t>(j, "m", g.m);
  g.m1 = get_or<std::size_t>(j, "m1", g.m1);
  return g;
}

SourceSet parse_sources(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "line") return SourceSet::line_array();
    throw ConfigError("unknown source preset: " + j.get<std::string>());
  }
  if (!j.is_array() || j.empty()) throw ConfigError("sources: expected \"line\" or a nonempty list");
  SourceSet s;
  for (const json& item : j) {
    check_keys(item, "source", {"position", "amplitude"});
    s.positions.push_back(point_of(item, "position"));
    s.amplitudes.push_back(item.contains("amplitude") ? complex_of(item.at("amplitude")) : cplx{1.0, 0.0});
  }
  return s;
}

Phantom parse_phantom(const json& j) {
  check_keys(j, "phantom", {"preset", "amplitude", "bumps"});
  const double a0 = get_or<double>(j, "amplitude", 0.3);
  if (j.contains("bumps")) {
    if (j.contains("preset")) throw ConfigError("phantom: give either a preset or bumps");
    Phantom p;
    p.amplitude = a0;
    for (const json& item : j.at("bumps")) {
      check_keys(item, "bump", {"center", "radius", "weight", "cross_yz"});
      Bump b;
      b.center = point_of(item, "center");
      b.radius = get_or<double>(item, "radius", 1.0);
      b.weight = get_or<double>(item, "weight", 1.0);
      b.cross_yz = get_or<double>(item, "cross_yz", 0.0);
      p.bumps.push_back(b);
    }
    return p;
  }
  const auto preset = get_or<std::string>(j, "preset", "three_bumps");
  if (preset != "three_bumps") throw ConfigError("unknown phantom preset: " + preset);
  return Phantom::three_bumps(a0);
}

json point_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

}  // namespace

RunConfig parse_config(const json& j) {
  check_keys(j, "config", {"name", "grid", "frequencies", "c0", "sources", "phantom", "noise", "forward",
                           "regularizer", "inversion", "kernel_cache", "output", "bench_sizes"});
  RunConfig c;
  c.name = get_or<std::string>(j, "name", c.name);
  if (j.contains("grid")) c.grid = parse_grid(j.at("grid"));
  c.frequencies = get_or<std::vector<double>>(j, "frequencies", c.frequencies);
  c.c0 = get_or<double>(j, "c0", c.c0);
  if (j.contains("sources")) c.sources = parse_sources(j.at("sources"));
  if (j.contains("phantom")) c.phantom = parse_phantom(j.at("phantom"));
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    check_keys(n, "noise", {"delta", "seed"});
    c.noise.delta = get_or<double>(n, "delta", c.noise.delta);
    c.noise.seed = get_or<std::uint64_t>(n, "seed", c.noise.seed);
  }
  if (j.contains("forward")) {
    const json& f = j.at("forward");
    check_keys(f, "forward", {"tol", "max_iter", "divergence_window"});
    c.forward.tol = get_or<double>(f, "tol", c.forward.tol);
    c.forward.max_iter = get_or<std::size_t>(f, "max_iter", c.forward.max_iter);
    c.forward.divergence_window = get_or<std::size_t>(f, "divergence_window", c.forward.divergence_window);
  }
  if (j.contains("regularizer")) {
    const json& r = j.at("regularizer");
    check_keys(r, "regularizer",
               {"method", "tsvd_threshold", "tikhonov_alpha", "policy", "discrepancy_factor", "reference"});
    RegularizerConfig& reg = c.regularizer;
    if (r.contains("method")) reg.method = parse_method(get_or<std::string>(r, "method", ""));
    reg.tsvd_rel_threshold = get_or<double>(r, "tsvd_threshold", reg.tsvd_rel_threshold);
    reg.tikhonov_alpha = get_or<double>(r, "tikhonov_alpha", reg.tikhonov_alpha);
    reg.discrepancy_factor = get_or<double>(r, "discrepancy_factor", reg.discrepancy_factor);
    if (r.contains("reference")) reg.reference = parse_reference(get_or<std::string>(r, "reference", ""));
    if (r.contains("policy")) c.policy = parse_policy(get_or<std::string>(r, "policy", ""));
  }
  if (j.contains("inversion")) {
    const json& inv = j.at("inversion");
    check_keys(inv, "inversion", {"division_epsilon", "combine"});
    c.inversion.division_epsilon = get_or<double>(inv, "division_epsilon", c.inversion.division_epsilon);
    c.inversion.combine = get_or<bool>(inv, "combine", c.inversion.combine);
  }
  if (j.contains("kernel_cache")) {
    const json& k = j.at("kernel_cache");
    check_keys(k, "kernel_cache", {"enabled", "dir"});
    c.kernel_cache.enabled = get_or<bool>(k, "enabled", c.kernel_cache.enabled);
    c.kernel_cache.dir = get_or<std::string>(k, "dir", "");
  }
  c.output = get_or<std::string>(j, "output", c.output.string());
  c.bench_sizes = get_or<std::vector<std::size_t>>(j, "bench_sizes", c.bench_sizes);
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

void RunConfig::validate() const {
  make_grids(grid);
  if (frequencies.empty()) throw ConfigError("config: frequency list is empty");
  for (double w : frequencies)
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("config: frequencies must be positive");
  if (!(c0 > 0.0)) throw ConfigError("config: c0 must be positive");
  if (sources.positions.empty() || sources.positions.size() != sources.amplitudes.size())
    throw ConfigError("config: sources need positions and amplitudes");
  for (const Bump& b : phantom.bumps)
    if (!(b.radius > 0.0)) throw ConfigError("config: bump radius must be positive");
  contrast(phantom, c0);
  if (!(noise.delta >= 0.0) || !std::isfinite(noise.delta)) throw ConfigError("config: noise delta must be >= 0");
  if (!(forward.tol > 0.0) || forward.max_iter == 0 || forward.divergence_window == 0)
    throw ConfigError("config: forward tolerances must be positive");
  if (!(inversion.division_epsilon >= 0.0 && inversion.division_epsilon < 1.0))
    throw ConfigError("config: division epsilon must lie in [0, 1)");
  for (std::size_t n : bench_sizes)
    if (!is_power_of_two(n)) throw ConfigError("config: bench sizes must be powers of two");
  effective_regularizer().validate();
}

RegularizerConfig RunConfig::effective_regularizer() const {
  RegularizerConfig r = regularizer;
  r.noise_level = noise.delta;
  r.policy = policy.value_or(noise.delta > 0.0 ? SelectionPolicy::discrepancy : SelectionPolicy::fixed);
  return r;
}

std::filesystem::path RunConfig::cache_dir() const {
  return kernel_cache.dir.empty() ? output / "kernels" : kernel_cache.dir;
}

json to_json(const GridConfig& g) {
  return json{{"x", {g.x_min, g.x_max}},
              {"y", {g.y_min, g.y_max}},
              {"n", g.n},
              {"scatterer_z", {g.scatterer_z_lo, g.scatterer_z_hi}},
              {"m", g.m},
              {"receiver_z", {g.receiver_z_lo, g.receiver_z_hi}},
              {"m1", g.m1}};
}

json to_json(const RunConfig& c) {
  json sources = json::array();
  for (std::size_t i = 0; i < c.sources.positions.size(); ++i)
    sources.push_back({{"position", point_json(c.sources.positions[i])},
                       {"amplitude", {c.sources.amplitudes[i].real(), c.sources.amplitudes[i].imag()}}});
  json bumps = json::array();
  for (const Bump& b : c.phantom.bumps)
    bumps.push_back({{"center", point_json(b.center)}, {"radius", b.radius}, {"weight", b.weight},
                     {"cross_yz", b.cross_yz}});
  json reg{{"method", to_string(c.regularizer.method)},
           {"tsvd_threshold", c.regularizer.tsvd_rel_threshold},
           {"tikhonov_alpha", c.regularizer.tikhonov_alpha},
           {"discrepancy_factor", c.regularizer.discrepancy_factor},
           {"reference", to_string(c.regularizer.reference)}};
  if (c.policy) reg["policy"] = to_string(*c.policy);
  return json{{"name", c.name},
              {"grid", to_json(c.grid)},
              {"frequencies", c.frequencies},
              {"c0", c.c0},
              {"sources", sources},
              {"phantom", {{"amplitude", c.phantom.amplitude}, {"bumps", bumps}}},
              {"noise", {{"delta", c.noise.delta}, {"seed", c.noise.seed}}},
              {"forward",
               {{"tol", c.forward.tol},
                {"max_iter", c.forward.max_iter},
                {"divergence_window", c.forward.divergence_window}}},
              {"regularizer", reg},
              {"inversion", {{"division_epsilon", c.inversion.division_epsilon}, {"combine", c.inversion.combine}}},
              {"kernel_cache", {{"enabled", c.kernel_cache.enabled}, {"dir", c.kernel_cache.dir.string()}}},
              {"output", c.output.string()},
              {"bench_sizes", c.bench_sizes}};
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

std::string config_hash(const RunConfig& config) {
  json j = to_json(config);
  // where results go does not change them
  j.erase("output");
  j.erase("kernel_cache");
  j.erase("name");
  return sha256_hex(j.dump());
}

}  // namespace flatinv
