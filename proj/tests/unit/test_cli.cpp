#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "flatinv_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(FLATINV_CLI) + " " + args + " > " + (kWork / "last.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string last_log() {
  std::ifstream in(kWork / "last.log");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path write_config(const std::string& name, const std::string& extra) {
  fs::create_directories(kWork);
  const fs::path p = kWork / (name + ".json");
  std::ofstream(p) << R"({"grid": {"x": [-8, 8], "y": [-8, 8], "n": 16, "m": 5, "m1": 5}, "frequencies": [1], "output": ")"
                   << (kWork / name).string() << "\"" << extra << "}";
  return p;
}

}  // namespace

TEST_CASE("full stage chain exits cleanly") {
  fs::remove_all(kWork);
  const fs::path cfg = write_config("chain", "");
  CHECK(run("phantom --config " + cfg.string()) == 0);
  CHECK(run("synthesize --config " + cfg.string() + " --freq 1,2 --delta 1e-6 --seed 5") == 0);
  CHECK(last_log().find("omega 2") != std::string::npos);
  CHECK(run("invert --config " + cfg.string() + " --freq 1,2 --delta 1e-6 --method tikhonov") == 0);
  CHECK(fs::exists(kWork / "chain" / "xi_ls.laf"));
  const fs::path eval = kWork / "chain_eval";
  CHECK(run("evaluate --config " + cfg.string() + " --freq 1,2 --data " + (kWork / "chain").string() + " --out " +
            eval.string()) == 0);
  CHECK(fs::exists(eval / "evaluate.manifest.json"));
  CHECK(run("bench --config " + cfg.string() + " --sizes 8,16 --out " + (kWork / "bench").string()) == 0);
  CHECK(last_log().find("fit:") != std::string::npos);
}

TEST_CASE("exit codes") {
  const fs::path cfg = write_config("codes", "");
  CHECK(run("--help") == 0);
  CHECK(run("invert --help") == 0);
  CHECK(run("") == 2);
  CHECK(run("frobnicate --config " + cfg.string()) == 2);
  CHECK(run("synthesize") == 2);
  CHECK(run("synthesize --config " + cfg.string() + " --method lsqr") == 2);
  CHECK(run("synthesize --config " + cfg.string() + " --delta -1") == 2);
  CHECK(run("synthesize --config " + (kWork / "missing.json").string()) == 4);

  const fs::path bad = write_config("bad", R"(, "colour": "red")");
  CHECK(run("synthesize --config " + bad.string()) == 2);
  CHECK(last_log().find("colour") != std::string::npos);

  const fs::path slow = write_config("slow", R"(, "forward": {"max_iter": 2})");
  CHECK(run("synthesize --config " + slow.string()) == 3);

  // invert without synthesized data cannot read the manifest
  CHECK(run("invert --config " + cfg.string()) == 4);

  // data from another grid is a configuration error
  CHECK(run("synthesize --config " + cfg.string()) == 0);
  const fs::path other = write_config("other", "");
  std::ofstream(other) << R"({"grid": {"x": [-8, 8], "y": [-8, 8], "n": 16, "m": 5, "m1": 3}, "frequencies": [1]})";
  CHECK(run("invert --config " + other.string() + " --data " + (kWork / "codes").string() + " --out " +
            (kWork / "other_out").string()) == 2);
}
