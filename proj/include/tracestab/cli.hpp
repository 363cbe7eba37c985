#pragma once

// Command-line orchestration: configuration, validation, and the six
// commands.  Each command prints one line per check and writes flat JSON/CSV
// reports; identical configurations produce byte-identical files.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tracestab/spectrum.hpp"

namespace tracestab::cli {

enum class Command { spectrum, constants, verify_trace, duality_sweep, counterexample, transport_probe };

std::string command_name(Command c);
// Throws PreconditionError for an unknown name.
Command command_from_name(const std::string& name);

struct RunConfig {
  Command command = Command::constants;

  // weight and spectrum
  int n = 3;
  double s = 1.0;
  std::string weight = "homogeneous";  // homogeneous | inhomogeneous | custom
  std::optional<spectrum::CustomTable> custom;
  int K = 10;
  double tol = 1e-10;
  std::optional<double> tau;  // adds Watson identity checks to `spectrum`

  // randomized commands
  std::optional<std::uint64_t> seed;
  int trials = 1000;

  // counterexample
  double r = 1.5;
  double sigma = 2.0;
  std::vector<double> deltas = {1e-1, 1e-2, 1e-3, 1e-4};

  // duality sweep
  double p = 1.5;
  double q = 2.5;
  int rows = 4;
  int cols = 3;
  int starts = 20;
  int operators = 100;

  // transport probe (n = 1)
  double L = 12.0;
  double h = 24.0 / 256.0;
  double t_extent = 4.0;
  std::vector<double> eps = {0.05, 0.1, 0.2};
  int directions = 5;
  int samples = 200;

  std::string output_dir;  // empty: TRACESTAB_OUTPUT_DIR, else ./tracestab-output
  std::string format = "json";

  nlohmann::json to_json() const;
  // Overlays the keys present in j onto *this.
  void merge_json(const nlohmann::json& j);
};

// Every precondition violation, without running anything.
std::vector<std::string> validate(const RunConfig& config);

struct CheckLine {
  std::string anchor;
  std::string description;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct RunResult {
  int exit_code = 0;
  std::vector<CheckLine> checks;
  std::vector<std::string> files;
};

// Runs a validated configuration, printing check lines to `out`.
// Exit code 0 when every check passes, 1 otherwise (module errors included).
RunResult run(const RunConfig& config, std::ostream& out);

// Anchor strings the commands can emit.
const std::vector<std::string>& anchor_catalog();

// Full entry point: argument parsing, config file, validation, run.
// Returns 0, 1, or 2 (usage or configuration error).
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tracestab::cli
