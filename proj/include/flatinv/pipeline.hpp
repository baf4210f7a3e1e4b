#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "flatinv/config.hpp"
#include "flatinv/forward.hpp"
#include "flatinv/inverse.hpp"

namespace flatinv {

inline constexpr const char* kToolVersion = "0.1.0";

/// "w2", "w1p5": file-name tag of a frequency.
std::string frequency_tag(double omega);

/// Kernel tables, operators and incident field of one frequency.
struct FrequencyOperators {
  double omega = 0.0;
  GreenKernelTable kernel_xx;
  GreenKernelTable kernel_xy;
  std::unique_ptr<KernelOperator> op_xx;
  std::unique_ptr<KernelOperator> op_xy;
  SpectralField u0_spec;

  FrequencyContext context() const { return {omega, &kernel_xy, op_xx.get(), &u0_spec}; }
};

/// Builds the kernel table for (source, receiver, omega), going through the
/// on-disk cache when `cache_dir` is nonempty.
GreenKernelTable cached_green_kernel(const std::filesystem::path& cache_dir, const Grid3D& source,
                                     const Grid3D& receiver, double omega, double c0);

FrequencyOperators prepare_frequency(const RunConfig& config, const GridPair& grids, double omega,
                                     const SlabTransform& transform);

/// Each stage writes its artifacts and a `<stage>.manifest.json` into `out`
/// and returns the manifest.
nlohmann::json run_phantom(const RunConfig& config, const std::filesystem::path& out);
nlohmann::json run_synthesize(const RunConfig& config, const std::filesystem::path& out);
/// `data_dir` holds the synthesize artifacts. Throws ConfigError before any
/// computation when their grids or frequencies do not match `config`.
nlohmann::json run_invert(const RunConfig& config, const std::filesystem::path& data_dir,
                          const std::filesystem::path& out);
/// `inversion_dir` holds the invert artifacts.
nlohmann::json run_evaluate(const RunConfig& config, const std::filesystem::path& inversion_dir,
                            const std::filesystem::path& out);
/// Wall time of the full inversion at the first configured frequency for
/// each transverse size in `sizes`, at the configured M and M1.
nlohmann::json run_bench(const RunConfig& config, const std::vector<std::size_t>& sizes,
                         const std::filesystem::path& out);

nlohmann::json read_manifest(const std::filesystem::path& path);

}  // namespace flatinv
