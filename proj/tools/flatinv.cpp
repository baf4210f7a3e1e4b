#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "flatinv/config.hpp"
#include "flatinv/errors.hpp"
#include "flatinv/pipeline.hpp"

namespace fs = std::filesystem;
using namespace flatinv;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<double> freq;
  std::optional<double> delta;
  std::string method;
  std::string data;
  std::vector<std::size_t> sizes;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON run config")->required();
  cmd->add_option("--out", o.out, "output directory (default: config output)");
  cmd->add_option("--seed", o.seed, "noise seed");
  cmd->add_option("--freq", o.freq, "frequencies, comma separated")->delimiter(',');
  cmd->add_option("--delta", o.delta, "relative noise level");
  cmd->add_option("--method", o.method, "regularization method")->check(CLI::IsMember({"tsvd", "tikhonov"}));
}

RunConfig resolve(const Options& o) {
  RunConfig c = load_config(o.config);
  if (o.seed) c.noise.seed = *o.seed;
  if (!o.freq.empty()) c.frequencies = o.freq;
  if (o.delta) c.noise.delta = *o.delta;
  if (!o.method.empty()) c.regularizer.method = parse_method(o.method);
  if (!o.out.empty()) c.output = o.out;
  c.validate();
  return c;
}

void print_summary(const nlohmann::json& m) {
  const std::string stage = m.at("stage");
  if (stage == "synthesize") {
    for (const auto& f : m.at("frequencies"))
      std::printf("omega %g: %zu iterations, residual %.3g -> %s\n", f.at("omega").get<double>(),
                  f.at("iterations").get<std::size_t>(), f.at("final_residual").get<double>(),
                  f.at("file").get<std::string>().c_str());
  } else if (stage == "invert") {
    for (const auto& r : m.at("results"))
      std::printf("%s: masked %.3f, imag %.3g -> %s\n", r.at("tag").get<std::string>().c_str(),
                  r.at("masked_fraction").get<double>(), r.at("imag_norm").get<double>(),
                  r.at("file").get<std::string>().c_str());
  } else if (stage == "evaluate") {
    for (const auto& e : m.at("evaluations")) {
      if (e.contains("mean_delta"))
        std::printf("%s: mean delta %.4f, max offset %.3f\n", e.at("tag").get<std::string>().c_str(),
                    e.at("mean_delta").get<double>(), e.at("max_offset").get<double>());
      else
        std::printf("%s: %s\n", e.at("tag").get<std::string>().c_str(), e.at("warning").get<std::string>().c_str());
    }
  } else if (stage == "bench") {
    for (const auto& r : m.at("records"))
      std::printf("N=%zu M=%zu M1=%zu: %.3f s\n", r.at("n").get<std::size_t>(), r.at("m").get<std::size_t>(),
                  r.at("m1").get<std::size_t>(), r.at("seconds").get<double>());
    if (m.contains("fit"))
      std::printf("fit: t ~ %.3g * N^%.3f\n", m.at("fit").at("t0").get<double>(),
                  m.at("fit").at("exponent").get<double>());
  } else if (stage == "phantom") {
    std::printf("max xi %.4g, contrast %.4g\n", m.at("max_xi").get<double>(), m.at("contrast").get<double>());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flat-layer acoustic inverse scattering"};
  app.require_subcommand(1);
  Options o;
  auto* phantom = app.add_subcommand("phantom", "dump the exact coefficient field");
  auto* synthesize = app.add_subcommand("synthesize", "solve the forward problem and write receiver data");
  auto* invert = app.add_subcommand("invert", "reconstruct the coefficient from receiver data");
  auto* evaluate = app.add_subcommand("evaluate", "accuracy and localization of reconstructions");
  auto* bench = app.add_subcommand("bench", "time the inversion against transverse size");
  for (auto* cmd : {phantom, synthesize, invert, evaluate, bench}) add_common(cmd, o);
  invert->add_option("--data", o.data, "synthesize output directory (default: --out)");
  evaluate->add_option("--data", o.data, "invert output directory (default: --out)");
  bench->add_option("--sizes", o.sizes, "transverse sizes, comma separated")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    const RunConfig config = resolve(o);
    const fs::path out = config.output;
    const fs::path data = o.data.empty() ? out : fs::path(o.data);
    nlohmann::json manifest;
    if (phantom->parsed()) manifest = run_phantom(config, out);
    if (synthesize->parsed()) manifest = run_synthesize(config, out);
    if (invert->parsed()) manifest = run_invert(config, data, out);
    if (evaluate->parsed()) manifest = run_evaluate(config, data, out);
    if (bench->parsed()) manifest = run_bench(config, o.sizes.empty() ? config.bench_sizes : o.sizes, out);
    print_summary(manifest);
    return kOk;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence at omega " << e.omega() << ": " << e.what() << '\n';
    return kNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "i/o error: malformed manifest: " << e.what() << '\n';
    return kIo;
  }
}
