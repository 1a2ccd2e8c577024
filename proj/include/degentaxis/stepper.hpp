#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "degentaxis/functionals.hpp"
#include "degentaxis/model.hpp"

namespace degentaxis {

struct SolveReport {
  int iterations = 0;
  /// Relative residual ||b - A x|| / ||b|| of the returned solution.
  double residual = 0.0;
};

/// Solves the nutrient system; `x` carries the initial guess in and the
/// solution out. 1D grids use the tridiagonal direct solve, higher
/// dimensions Jacobi-preconditioned conjugate gradients with a fixed
/// iteration order. Throws InstabilityError if `tol` is not reached.
SolveReport solve_v_system(const VImplicitSystem& sys, std::vector<double>& x, double tol, int max_iter);

struct StepReport {
  double dt = 0.0;
  /// Mass added by zeroing negative u (density times volume).
  double mass_clipped = 0.0;
  /// dt * int u_old v_new: the nutrient consumed during the step.
  double consumption = 0.0;
  int solver_iterations = 0;
  double solver_residual = 0.0;
  double max_u = 0.0;
  double min_u = 0.0;
  double max_v = 0.0;
  double min_v = 0.0;
};

/// Explicit-update limit
///   safety * min_a h_a^2 / (2 dim max m_f + 2 dim h_a max drift_f),
/// with m_f the face mobility and drift_f = chi u_up^{alpha-1} v_f |grad v|_f,
/// capped by dt_max (and equal to it for fully degenerate states).
double stable_dt(const State& s, const Params& p);

/// One split step: v_new from the implicit system with the old u, then
///   u_new = u + dt (transport_u(u, v) + ell u v_new)
/// and the clip policy. With this pairing the budgets close exactly:
///   int u_new - int u = ell * consumption + mass_clipped,
///   int v_new - int v = -consumption.
/// Throws InstabilityError on non-finite output and PositivityError under
/// the reject policy.
std::pair<State, StepReport> step(const State& s, const Params& p, double dt);

enum class Termination { Horizon, Steady, Instability, RegimeViolation };
std::string to_string(Termination t);

struct SteadyTolerances {
  double tol_v = 1e-6;
  double tol_u = 1e-8;
};

/// True iff the newest record has mass_v <= tol_v * initial_mass_v and its
/// dual-norm increment rate dual_step / (t_last - t_prev) is below tol_u.
/// Needs at least two records; a record without dual_step never qualifies.
bool detect_steady(std::span<const DiagnosticsRecord> window, double initial_mass_v,
                   const SteadyTolerances& tol);

/// Receives output while a run progresses.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_record(const DiagnosticsRecord&) {}
  virtual void on_snapshot(const State&) {}
  virtual void on_crash(const State&) {}
};

struct RunOptions {
  double horizon = 1.0;
  /// Time between diagnostics records; <= 0 records only the endpoints.
  double sample_cadence = 0.1;
  /// Time between snapshot callbacks; <= 0 disables them.
  double snapshot_cadence = 0.0;
  bool stop_at_steady = false;
  SteadyTolerances steady;
  /// Refuse to run unless alpha lies in the theory window (3/2, 19/12).
  bool certify = false;
  /// Accumulate time integrals of the budgeted dissipation rates each step.
  bool track_budgets = false;
  /// Keep u at every sample time in RunResult::u_samples.
  bool keep_samples = false;
  DiagnosticsConfig diagnostics;
};

struct RunResult {
  State final_state;
  std::vector<DiagnosticsRecord> series;
  std::vector<Field> u_samples;
  Termination reason = Termination::Horizon;
  std::string message;
  /// Last finite state before an instability.
  std::optional<State> crash_state;
  std::size_t steps = 0;
  double cumulative_consumption = 0.0;
  double mass_clipped = 0.0;
  DissipationBudgets budgets;
};

/// Advances with adaptive dt to the horizon (or to steady state when
/// requested), emitting a record at t0, at every cadence point and at the end.
RunResult run(const State& initial, const Params& p, const RunOptions& opts, RunObserver* observer = nullptr);

}  // namespace degentaxis
