#pragma once

// Batch front end: TOML problem files in, JSON reports and CSV grids out.
//
// Exit codes: 0 pass, 2 mathematical violation, 1 input or usage error.

#include "toric/bmetric.hpp"
#include "toric/lift.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace toric::cli {

inline constexpr const char* version = "0.1.0";

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"check-delzant", "finite-type",   "reduce",         "potential",
                                          "metric-eval",   "residues",      "hessian-check",  "curvature",
                                          "extremal-check", "extremal-solve", "lift-check"};
  return s;
}

/// Schema or usage problem; line is 0 when unknown.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, std::string field = {}, std::size_t line = 0);
  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

struct Problem {
  DelzantModel model;
  std::optional<HybridBMetric> metric;
  std::optional<ConnectionParams> lift;
  std::string digest;  // sha256 of the file bytes
};

/// Parses a problem document. source names the file in error messages.
Problem parse_problem(const std::string& text, const std::string& source = "<input>");
Problem load_problem(const std::string& path);

std::string sha256_hex(const std::string& bytes);

struct RunConfig {
  std::string subcommand;
  std::optional<std::string> input;
  std::optional<std::string> out_json, out_csv;
  std::optional<double> margin;
  std::optional<int> grid;
  std::optional<std::string> kappa;
  std::optional<double> tol;
  // extremal-solve
  std::string weight = "const";
  // lift-check overrides of the [lift] table
  std::optional<std::string> family;
  std::optional<double> a, b, c;
};

struct RunResult {
  int exit_code = 0;
  nlohmann::json report;  // always set, also on errors
  std::string csv;        // empty unless the subcommand produces a grid
};

/// Never throws; errors become exit code 1 with an "error" report.
RunResult run(const RunConfig& config);

/// Argument parsing, file output, and printing of the report to stdout.
int main(int argc, char** argv);

}  // namespace toric::cli
