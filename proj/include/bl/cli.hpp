#pragma once

// Command-line front end: one command per process, JSON config in, CSV/JSON
// artifacts out under <out>/<command>-<timestamp>/.
//
// Exit codes: 0 success, 1 error (bad config, numerical failure), 2 a check
// residual exceeded its tolerance.

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace bl::cli {

namespace fs = std::filesystem;

struct RunConfig {
  std::string command;
  fs::path input;
  fs::path output_dir;
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;
  bool emit_gnuplot = false;
};

struct RunOutcome {
  int exit_code = 0;
  fs::path artifact_dir;
  std::string message;
};

const std::vector<std::string>& commands();

RunOutcome run(const RunConfig& cfg);

// Loewner map -> phi -> Vlasov steps -> moments -> Benney residual and
// conserved-integral drift. Artifacts go to `dir` when it is non-empty.
struct KineticVerdict {
  nlohmann::json report;
  bool pass = true;
};
KineticVerdict pipeline_kinetic_verify(const nlohmann::json& config, const std::map<std::string, double>& tolerances,
                                       const fs::path& dir = {});

int main(int argc, char** argv);

}  // namespace bl::cli
