#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "flatinv/config.hpp"

using namespace flatinv;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(FLATINV_SOURCE_DIR) / "configs";

fs::path write_text(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("flatinv_cfg_" + name);
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("bundled presets load and validate") {
  std::size_t seen = 0;
  for (const fs::path& dir : {kConfigs, kConfigs / "desk"})
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".json") continue;
      CAPTURE(entry.path().string());
      const RunConfig c = load_config(entry.path());
      CHECK_NOTHROW(c.validate());
      CHECK(c.noise.seed == 20240101);
      ++seen;
    }
  CHECK(seen == 11);

  const RunConfig thin = load_config(kConfigs / "thin-exact.json");
  CHECK(thin.grid.n == 128);
  CHECK(thin.grid.m1 == 2);
  CHECK(thin.grid.receiver_z_hi == doctest::Approx(6.02));
  const RunConfig three = load_config(kConfigs / "three-frequency.json");
  CHECK(three.frequencies == std::vector<double>{1.0, 2.0, 3.0});
  const RunConfig noisy = load_config(kConfigs / "thick-delta1e-5.json");
  CHECK(noisy.noise.delta == doctest::Approx(1e-5));
  CHECK(noisy.effective_regularizer().policy == SelectionPolicy::discrepancy);
  CHECK(noisy.effective_regularizer().noise_level == doctest::Approx(1e-5));
}

TEST_CASE("defaults and overrides") {
  const RunConfig d = parse_config(json::object());
  CHECK(d.frequencies == std::vector<double>{2.0});
  CHECK(d.sources.positions.size() == 11);
  CHECK(d.phantom.bumps.size() == 3);
  CHECK(d.effective_regularizer().policy == SelectionPolicy::fixed);
  CHECK(d.cache_dir() == fs::path("out") / "kernels");

  const RunConfig c = parse_config(json::parse(R"({
    "sources": [{"position": [0, 0, 7], "amplitude": [0, 1]}],
    "phantom": {"bumps": [{"center": [0, 0, 0.5], "radius": 0.5, "weight": 0.4}]},
    "regularizer": {"method": "tikhonov", "policy": "discrepancy", "reference": "global"},
    "noise": {"delta": 1e-3},
    "kernel_cache": {"dir": "/tmp/k"}
  })"));
  CHECK(c.sources.amplitudes[0] == cplx(0.0, 1.0));
  CHECK(c.phantom.max_value() == doctest::Approx(0.3 * 0.4));
  CHECK(c.regularizer.method == Method::tikhonov);
  CHECK(c.regularizer.reference == ThresholdReference::global);
  CHECK(c.cache_dir() == fs::path("/tmp/k"));
}

TEST_CASE("malformed configs are rejected") {
  CHECK_THROWS_AS(parse_config(json::parse(R"({"frequency": [2]})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"grid": {"nx": 64}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"grid": {"x": [1]}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"sources": "ring"})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"regularizer": {"method": "lsqr"}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"frequencies": "two"})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse("[1, 2]")), ConfigError);

  RunConfig c;
  c.frequencies = {};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.frequencies = {-1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.noise.delta = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.phantom = Phantom::three_bumps(0.5);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.bench_sizes = {48};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.policy = SelectionPolicy::discrepancy;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  CHECK_THROWS_AS(load_config("/nonexistent/flatinv.json"), IoError);
  CHECK_THROWS_AS(load_config(write_text("broken.json", "{ not json")), ConfigError);
}

TEST_CASE("config hash is stable and ignores output placement") {
  const RunConfig a = load_config(kConfigs / "desk" / "thick-exact.json");
  RunConfig b = a;
  b.output = "elsewhere";
  b.name = "renamed";
  b.kernel_cache.enabled = false;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 64);
  b.noise.seed += 1;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(parse_config(to_json(a))) == config_hash(a));
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_file(write_text("abc.txt", "abc")) == sha256_hex("abc"));
  CHECK_THROWS_AS(sha256_file("/nonexistent/file"), IoError);
}
