#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "flatinv/field.hpp"
#include "flatinv/forward.hpp"
#include "flatinv/medium.hpp"
#include "flatinv/regularize.hpp"

namespace flatinv {

struct NoiseConfig {
  double delta = 0.0;
  std::uint64_t seed = 1;
};

struct InversionConfig {
  double division_epsilon = 1e-3;
  /// Least-squares combination over frequencies when more than one is given.
  bool combine = true;
};

struct KernelCacheConfig {
  bool enabled = true;
  /// Empty: <output>/kernels.
  std::filesystem::path dir;
};

struct RunConfig {
  std::string name = "run";
  GridConfig grid;
  std::vector<double> frequencies{2.0};
  double c0 = 1.0;
  SourceSet sources = SourceSet::line_array();
  Phantom phantom = Phantom::three_bumps(0.3);
  NoiseConfig noise;
  BornOptions forward;
  RegularizerConfig regularizer;
  /// Unset: fixed threshold for exact data, discrepancy principle otherwise.
  std::optional<SelectionPolicy> policy;
  InversionConfig inversion;
  KernelCacheConfig kernel_cache;
  std::filesystem::path output = "out";
  std::vector<std::size_t> bench_sizes{32, 64, 128};

  /// Throws ConfigError on any invalid field.
  void validate() const;
  /// Regularizer with the policy and noise level resolved.
  RegularizerConfig effective_regularizer() const;
  std::filesystem::path cache_dir() const;
};

RunConfig parse_config(const nlohmann::json& j);
/// Reads and validates a JSON config. Throws IoError when unreadable and
/// ConfigError when malformed.
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const GridConfig& grid);

/// Hex SHA-256 of the canonical JSON form.
std::string config_hash(const RunConfig& config);
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace flatinv
