#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "degentaxis/error.hpp"
#include "degentaxis/inequalities.hpp"
#include "degentaxis/scenarios.hpp"

namespace degentaxis {

/// Every problem found in a config, one "line N: ..." entry each.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct OutputConfig {
  std::string directory;
  bool ndjson = true;
  bool snapshot = true;
  bool csv = true;
};

struct InequalityConfig {
  std::vector<std::pair<InequalityKind, InequalityExponents>> cases;
  int samples = 100;
  std::uint64_t seed = 1;
  std::optional<double> c_cap;
  std::vector<int> refinement{16, 32, 64};
  SamplerOptions sampler;
};

struct RunConfig {
  Grid grid;
  Params params;
  InitialDataSpec initial;
  double horizon = 1.0;
  double sample_cadence = 0.1;
  double snapshot_cadence = 0.0;
  bool stop_at_steady = false;
  SteadyTolerances steady;
  bool certify = false;
  bool track_budgets = false;
  double nonconstancy_fraction = 0.5;
  DiagnosticsConfig diagnostics;
  OutputConfig output;
  std::vector<double> sweep_scales{1.0, 0.1, 0.01};
  InequalityConfig inequalities;
  /// The text the config was parsed from (hashed into manifests).
  std::string source;
};

/// Parses the sectioned `key = value` format documented in
/// config-reference.md. '#' starts a comment. Unknown sections or keys,
/// malformed values and range violations are all collected and thrown
/// together as ConfigError.
RunConfig parse_config(const std::string& text);

/// Re-checks the cross-field constraints (certify against alpha, ...);
/// used again after command-line overrides.
void validate_config(const RunConfig& cfg);

RunOptions run_options(const RunConfig& cfg);
StabilizationOptions stabilization_options(const RunConfig& cfg);

}  // namespace degentaxis
