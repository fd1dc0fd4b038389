#include "bl/cli.hpp"

#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("bl_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int shell(const std::string& args) {
  const int rc = std::system((std::string(BL_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
  std::ofstream(dir / name) << text;
  return dir / name;
}

std::vector<fs::path> runs(const fs::path& out) {
  std::vector<fs::path> v;
  for (const auto& e : fs::directory_iterator(out)) v.push_back(e.path());
  std::sort(v.begin(), v.end());
  return v;
}

std::string config(const std::string& command) { return std::string(BL_EXAMPLES_DIR) + "/" + command + ".json"; }

}  // namespace

TEST_CASE("every command runs on its example config") {
  for (const auto& c : bl::cli::commands()) {
    const auto out = scratch("all");
    CAPTURE(c);
    CHECK(shell(c + " --config " + config(c) + " --out " + out.string()) == 0);
  }
}

TEST_CASE("identical config and seed give byte-identical artifacts") {
  const auto out = scratch("determinism");
  for (int k = 0; k < 2; ++k) {
    bl::cli::RunConfig rc;
    rc.command = "bracket-check";
    rc.input = config("bracket-check");
    rc.output_dir = out;
    rc.seed = 42;
    REQUIRE(bl::cli::run(rc).exit_code == 0);
  }
  const auto dirs = runs(out);
  REQUIRE(dirs.size() == 2);
  for (const auto& e : fs::directory_iterator(dirs[0])) CHECK(slurp(e.path()) == slurp(dirs[1] / e.path().filename()));
  // A different seed draws different fields.
  bl::cli::RunConfig rc{"bracket-check", config("bracket-check"), out, 43, {}, false};
  const auto third = bl::cli::run(rc);
  CHECK(slurp(third.artifact_dir / "report.json") != slurp(dirs[0] / "report.json"));
}

TEST_CASE("tolerance breach exits 2 with a report") {
  const auto out = scratch("breach");
  CHECK(shell("check-dkp --config " + config("check-dkp") + " --out " + out.string() + " --tol dkp=1e-12") == 2);
  const auto dirs = runs(out);
  REQUIRE(dirs.size() == 1);
  CHECK(slurp(dirs[0] / "report.json").find("\"pass\": false") != std::string::npos);
}

TEST_CASE("configuration errors exit 1 and name the line") {
  const auto dir = scratch("bad");
  const auto out = dir / "out";
  const auto broken = write(dir, "broken.json", "{\n  \"coeffs\": [1, 2,\n}\n");
  bl::cli::RunConfig rc{"invert-series", broken, out, 0, {}, false};
  auto o = bl::cli::run(rc);
  CHECK(o.exit_code == 1);
  CHECK(o.message.find("broken.json:3:") != std::string::npos);

  const auto unknown = write(dir, "unknown.json", "{\n  \"N\": 4,\n  \"closure\": \"warm\"\n}\n");
  rc = {"evolve-chain", unknown, out, 0, {}, false};
  o = bl::cli::run(rc);
  CHECK(o.exit_code == 1);
  CHECK(o.message.find("unknown.json:3:") != std::string::npos);
  CHECK((!fs::exists(out) || fs::is_empty(out)));

  CHECK(shell("no-such-command --config " + broken.string() + " --out " + out.string()) == 1);
  CHECK(shell("invert-series --out " + out.string()) == 1);
  CHECK(shell("invert-series --config " + config("invert-series") + " --out " + out.string() + " --tol nonsense") == 1);
  CHECK(shell("--help") == 0);
}

TEST_CASE("gnuplot scripts accompany CSV artifacts") {
  const auto out = scratch("gnuplot");
  bl::cli::RunConfig rc{"trace-slit", config("trace-slit"), out, 0, {}, true};
  const auto o = bl::cli::run(rc);
  REQUIRE(o.exit_code == 0);
  CHECK(fs::exists(o.artifact_dir / "tips.gp"));
  CHECK(slurp(o.artifact_dir / "tips.csv").rfind("t,re,im\n", 0) == 0);
  CHECK(slurp(o.artifact_dir / "run.json").find("\"seed\"") != std::string::npos);
}

TEST_CASE("invert-series reports H^2 = 3 for the example") {
  const auto out = scratch("invert");
  bl::cli::RunConfig rc{"invert-series", config("invert-series"), out, 0, {}, false};
  const auto o = bl::cli::run(rc);
  REQUIRE(o.exit_code == 0);
  const auto j = nlohmann::json::parse(slurp(o.artifact_dir / "inverse.json"));
  CHECK(j["h"][2] == "3");
}

TEST_CASE("slit-map initial data: phi = exp(-g^2) = exp(-4t) exp(-w^2)") {
  std::ifstream in(config("evolve-kinetic-slit"));
  const auto cfg = nlohmann::json::parse(in);
  const auto v = bl::cli::pipeline_kinetic_verify(cfg, {});
  // t(x) = 0.1 + 0.05 cos x: mass = sqrt(pi) int exp(-4 t(x)) dx = 2 pi sqrt(pi) e^{-0.4} I_0(0.2).
  const double expect = 2 * std::numbers::pi * std::sqrt(std::numbers::pi) * std::exp(-0.4) * std::cyl_bessel_i(0.0, 0.2);
  CHECK(v.report["initial_mass"].get<double>() == doctest::Approx(expect).epsilon(1e-8));
  CHECK(v.pass);
}
