#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hjb {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { evolve, ergodic, verify, counterexample, full };

std::string to_string(Mode m);
Mode parse_mode(const std::string& text);

struct RunConfig {
  std::string problem;
  Mode mode = Mode::evolve;
  int n_per_axis = 64;
  double t_final = 10.0;
  std::vector<double> lambda_sweep{0.1, 0.05, 0.025};
  double eta = 0.01;
  double mu = 1.0;
  double threshold = 1e-3;
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  double record_every = 0.05;  // snapshot spacing of the Cauchy run
  double export_every = 1.0;   // spacing of snapshots written to trajectory.csv (0: all)
};

/// Stages a mode runs, in order. `full` expands to verify, ergodic, evolve, diagnostics.
struct Stages {
  bool verify = false;
  bool ergodic = false;
  bool evolve = false;
  bool diagnostics = false;
  bool exact_error = false;
};
Stages expand_mode(Mode m);

/// Flat `key = value` lines, `#` starts a comment. Errors name the offending line.
RunConfig parse_config(const std::string& text);

/// Sets one key from its textual value; `where` prefixes error messages.
void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& where);

/// Range and catalog-name checks shared by file and flag input.
void validate(const RunConfig& cfg);

/// Runs the configured stages, writes artifacts into cfg.out_dir and returns 0 (all PASS) or 1 (some FAIL).
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace hjb
