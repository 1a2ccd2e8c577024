#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "degentaxis/stepper.hpp"

namespace degentaxis {

enum class RecipeKind { Constant, TwoBump, CosineMix, SeededRandom };

std::string to_string(RecipeKind k);
RecipeKind recipe_from_string(const std::string& s);

/// floor + level * shape, where shape is
///   constant       1
///   two-bump       two Gaussians of std `width` (in units of the box) centred
///                  at 0.3 and 0.7 along x (0.35 / 0.65 along y, 0.5 along z)
///   cosine-mix     1 + 0.5 * mean_a cos(pi x_a / L_a)
///   seeded-random  cosine series with `modes` modes rescaled to [0, 1]
struct Recipe {
  RecipeKind kind = RecipeKind::Constant;
  double level = 1.0;
  double floor = 0.0;
  double width = 0.1;
  int modes = 3;
};

struct InitialDataSpec {
  Recipe u0;
  Recipe v0;
  /// Multiplies the whole v0 recipe (floor included).
  double v0_scale = 1.0;
  std::uint64_t seed = 1;
};

struct InitialData {
  Field u0;
  Field v0;
  /// max u0 + max v0 + max |grad ln v0|.
  double K = 0.0;
  /// int ln u0; unset when u0 vanishes somewhere.
  std::optional<double> log_mass_u0;
};

/// Builds (u0 + eps, v0). Throws InvalidArgument for u0 with negative
/// entries or identically zero, v0 not strictly positive (e.g. v0_scale = 0)
/// and malformed recipes.
InitialData make_initial_data(const Grid& grid, const InitialDataSpec& spec, double eps = 0.0);

struct StabilizationOptions {
  double horizon = 50.0;
  double sample_cadence = 0.5;
  bool stop_at_steady = true;
  SteadyTolerances steady;
  /// Non-constancy holds when ||u_end - mean||_* >= fraction * ||u0 - mean||_*.
  double nonconstancy_fraction = 0.5;
  bool certify = false;
  bool track_budgets = true;
  bool keep_samples = false;
  /// dual_norm is always switched on.
  DiagnosticsConfig diagnostics;
};

struct Verdicts {
  /// int v(end) < 1e-6 int v0 and ||grad v(end)||_2 <= 1e-4 max_t ||grad v(t)||_2.
  bool v_decay = false;
  /// First sample time at which detect_steady holds on the recorded series.
  std::optional<double> steady_time;
  bool nonconstant = false;
};

struct StabilizationReport {
  std::vector<DiagnosticsRecord> series;
  Termination reason = Termination::Horizon;
  std::string message;
  double initial_mass_v = 0.0;
  double K = 0.0;
  double final_dual_dist_u0 = 0.0;
  double max_dual_dist_u0 = 0.0;
  double final_variance_u = 0.0;
  double u0_dist_to_mean = 0.0;
  double final_dist_to_mean = 0.0;
  double nonconstancy_fraction = 0.5;
  SteadyTolerances steady;
  Verdicts verdicts;
  State final_state;
  std::vector<Field> u_samples;
  DissipationBudgets budgets;
  std::size_t steps = 0;
};

/// Recomputes the verdicts from the stored series and scalars only.
Verdicts compute_verdicts(const StabilizationReport& r);

/// Runs from the given initial data (to steady state or the horizon) and
/// fills the report. With `certify` and alpha outside (3/2, 19/12) the run
/// is refused and reason = RegimeViolation.
StabilizationReport stabilization_experiment(const Grid& grid, const InitialDataSpec& spec, const Params& p,
                                             const StabilizationOptions& opts);

/// || f - mean(f) ||_*.
double dual_distance_to_mean(const Field& f);

/// Spatial variance int (f - mean)^2 / |Omega|.
double spatial_variance(const Field& f);

nlohmann::ordered_json to_json(const StabilizationReport& r);
/// Reads back what to_json wrote (fields are not stored).
StabilizationReport report_from_json(const nlohmann::json& j);

struct SweepLeg {
  double scale = 0.0;
  double mass_v0 = 0.0;
  /// sum of dual distances between consecutive samples.
  double variation = 0.0;
  double final_dual_dist_u0 = 0.0;
  double max_dual_dist_u0 = 0.0;
  double u0_dist_to_mean = 0.0;
  double final_dist_to_mean = 0.0;
  Termination reason = Termination::Horizon;
  double cumulative_consumption = 0.0;
  DissipationBudgets budgets;
  Verdicts verdicts;
};

struct SweepReport {
  std::vector<SweepLeg> legs;
  /// Least-squares slope of log V against log(s int v0); unset when fewer
  /// than two legs have V > 0.
  std::optional<double> sigma_hat;
  std::optional<double> log_c;
  /// Problems worth a look (non-monotone V, undefined fit, ...).
  std::vector<std::string> flags;
};

/// One stabilization run per scale, legs reported in the given order.
/// Needs at least three scales with max/min >= 100.
SweepReport v0_sweep(const Grid& grid, const InitialDataSpec& spec, const std::vector<double>& scales,
                     const Params& p, const StabilizationOptions& opts);

/// Recomputes flags, sigma_hat and log_c from the legs.
void fit_sweep(SweepReport& report);

nlohmann::ordered_json to_json(const SweepReport& r);

}  // namespace degentaxis
