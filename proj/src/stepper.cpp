#include "degentaxis/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "degentaxis/dualnorm.hpp"
#include "degentaxis/error.hpp"
#include "degentaxis/parallel.hpp"

namespace degentaxis {
namespace {

double norm2(std::span<const double> x) {
  CompensatedSum s;
  for (double e : x) s.add(e * e);
  return std::sqrt(s.value());
}

double dot(std::span<const double> a, std::span<const double> b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return s.value();
}

double relative_residual(const VImplicitSystem& sys, std::span<const double> x, double bnorm) {
  std::vector<double> ax(x.size());
  sys.apply(x, ax);
  const auto& b = sys.rhs();
  for (std::size_t i = 0; i < ax.size(); ++i) ax[i] = b[i] - ax[i];
  return bnorm > 0.0 ? norm2(ax) / bnorm : norm2(ax);
}

SolveReport solve_tridiagonal(const VImplicitSystem& sys, std::vector<double>& x) {
  const std::size_t n = sys.grid().size();
  const double off = sys.off_diagonal(0);
  const auto& b = sys.rhs();
  const std::vector<double> diag = sys.diagonal();
  std::vector<double> c(n, 0.0);
  std::vector<double> d(n, 0.0);
  double denom = diag[0];
  c[0] = off / denom;
  d[0] = b[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - off * c[i - 1];
    c[i] = off / denom;
    d[i] = (b[i] - off * d[i - 1]) / denom;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return {1, relative_residual(sys, x, norm2(b))};
}

SolveReport solve_pcg(const VImplicitSystem& sys, std::vector<double>& x, double tol, int max_iter) {
  const std::size_t n = sys.grid().size();
  const auto& b = sys.rhs();
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0};
  }
  std::vector<double> inv_diag = sys.diagonal();
  for (double& d : inv_diag) d = 1.0 / d;

  std::vector<double> r(n), z(n), p(n), ap(n);
  sys.apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = b[i] - ap[i];
    z[i] = inv_diag[i] * r[i];
  }
  p = z;
  double rz = dot(r, z);
  int it = 0;
  while (it < max_iter && norm2(r) > tol * bnorm) {
    sys.apply(p, ap);
    const double step = rz / dot(p, ap);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * ap[i];
      z[i] = inv_diag[i] * r[i];
    }
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    ++it;
  }
  return {it, relative_residual(sys, x, bnorm)};
}

}  // namespace

SolveReport solve_v_system(const VImplicitSystem& sys, std::vector<double>& x, double tol, int max_iter) {
  if (x.size() != sys.grid().size()) x = sys.rhs();
  SolveReport rep = sys.grid().dim == 1 ? solve_tridiagonal(sys, x) : solve_pcg(sys, x, tol, max_iter);
  if (rep.residual > tol && sys.grid().dim > 1) {
    // Restart once from the current iterate; recurrences drift on long runs.
    const SolveReport again = solve_pcg(sys, x, tol, max_iter);
    rep.iterations += again.iterations;
    rep.residual = again.residual;
  }
  if (!(rep.residual <= tol)) {
    throw InstabilityError("v solve stalled at relative residual " + std::to_string(rep.residual));
  }
  return rep;
}

double stable_dt(const State& s, const Params& p) {
  const Grid& g = s.u.grid;
  const std::vector<double> u_pow = taxis_weights(s.u, p.alpha);
  double dt = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim; ++a) {
    const double h = g.spacing[a];
    double max_m = 0.0;
    double max_drift = 0.0;
    // Face maxima are order independent, so the row loop stays serial.
    const std::size_t stride = g.stride(a);
    for (std::size_t i = 0; i + stride < g.size(); ++i) {
      if (a == 0 && (i + 1) % g.cells[0] == 0) continue;
      if (a == 1 && (i / g.cells[0]) % g.cells[1] + 1 == static_cast<std::size_t>(g.cells[1])) continue;
      const std::size_t j = i + stride;
      max_m = std::max(max_m, face_mobility(s.u[i] * s.v[i], s.u[j] * s.v[j], p.mobility));
      const double dv = (s.v[j] - s.v[i]) / h;
      if (dv == 0.0) continue;
      // chi u^{alpha-1} v_f |grad v|, from the cached u^alpha of the upwind cell
      const std::size_t up = dv > 0.0 ? i : j;
      if (s.u[up] == 0.0) continue;
      const double drift = p.chi * (u_pow[up] / s.u[up]) * 0.5 * (s.v[i] + s.v[j]) * std::abs(dv);
      max_drift = std::max(max_drift, drift);
    }
    const double denom = 2.0 * g.dim * (max_m + h * max_drift);
    if (denom > 0.0) dt = std::min(dt, p.safety * h * h / denom);
  }
  return std::min(dt, p.dt_max);
}

std::pair<State, StepReport> step(const State& s, const Params& p, double dt) {
  validate_state(s);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("step needs a finite dt > 0");
  const Grid& g = s.u.grid;

  StepReport rep;
  rep.dt = dt;

  const Field transport = transport_u(s, p);

  const VImplicitSystem sys = v_implicit_operator(s, dt);
  std::vector<double> v_new = s.v.values;
  const SolveReport solve = solve_v_system(sys, v_new, p.solver_tol, p.solver_max_iter);
  rep.solver_iterations = solve.iterations;
  rep.solver_residual = solve.residual;

  State next;
  next.t = s.t + dt;
  next.v = Field(g);
  next.v.values = std::move(v_new);
  next.u = Field(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    next.u[i] = s.u[i] + dt * (transport[i] + p.ell * s.u[i] * next.v[i]);
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(next.u[i]) || !std::isfinite(next.v[i])) {
      throw InstabilityError("non-finite value at t = " + std::to_string(next.t));
    }
  }

  CompensatedSum clipped;
  for (double& x : next.u.values) {
    if (x >= 0.0) continue;
    if (p.clip_policy == ClipPolicy::Reject) {
      throw PositivityError("negative u = " + std::to_string(x) + " at t = " + std::to_string(next.t));
    }
    clipped.add(-x);
    x = 0.0;
  }
  rep.mass_clipped = clipped.value() * g.cell_volume();
  rep.consumption = dt * integrate_product(s.u, next.v);

  const auto [min_u, max_u] = std::minmax_element(next.u.values.begin(), next.u.values.end());
  const auto [min_v, max_v] = std::minmax_element(next.v.values.begin(), next.v.values.end());
  rep.min_u = *min_u;
  rep.max_u = *max_u;
  rep.min_v = *min_v;
  rep.max_v = *max_v;
  return {std::move(next), rep};
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Horizon:
      return "horizon";
    case Termination::Steady:
      return "steady";
    case Termination::Instability:
      return "instability";
    case Termination::RegimeViolation:
      return "regime-violation";
  }
  return "unknown";
}

bool detect_steady(std::span<const DiagnosticsRecord> window, double initial_mass_v,
                   const SteadyTolerances& tol) {
  if (window.size() < 2) throw InvalidArgument("detect_steady needs at least two records");
  const DiagnosticsRecord& last = window[window.size() - 1];
  const DiagnosticsRecord& prev = window[window.size() - 2];
  if (!last.dual_step) return false;
  const double span = last.t - prev.t;
  if (!(span > 0.0)) return false;
  return last.mass_v <= tol.tol_v * initial_mass_v && *last.dual_step / span < tol.tol_u;
}

namespace {

class RunLoop {
 public:
  RunLoop(const State& initial, const Params& p, const RunOptions& opts, RunObserver* observer)
      : p_(p), opts_(opts), observer_(observer), u0_(initial.u) {
    result_.final_state = initial;
    mass_u0_ = integrate(initial.u);
    mass_v0_ = integrate(initial.v);
    track_dual_ = opts.diagnostics.dual_norm || opts.stop_at_steady;
  }

  RunResult execute() {
    State& state = result_.final_state;
    const double t0 = state.t;
    const double t_end = t0 + opts_.horizon;
    emit_record(state);
    std::size_t sample_k = 1;
    std::size_t snap_k = 1;
    auto next_sample = [&] {
      return opts_.sample_cadence > 0.0 ? std::min(t_end, t0 + sample_k * opts_.sample_cadence) : t_end;
    };
    auto next_snapshot = [&] {
      return opts_.snapshot_cadence > 0.0 ? t0 + snap_k * opts_.snapshot_cadence
                                          : std::numeric_limits<double>::infinity();
    };

    while (state.t < t_end) {
      const double target = std::min({next_sample(), next_snapshot(), t_end});
      double dt = stable_dt(state, p_);
      const bool lands = dt >= target - state.t;
      if (lands) dt = target - state.t;

      if (opts_.track_budgets) result_.budgets.add_scaled(budget_rates(state, p_.alpha), dt);

      std::pair<State, StepReport> out;
      try {
        out = step(state, p_, dt);
      } catch (const InstabilityError& e) {
        return crash(e.what());
      }
      ++result_.steps;
      result_.cumulative_consumption += out.second.consumption;
      result_.mass_clipped += out.second.mass_clipped;
      state = std::move(out.first);
      if (lands) state.t = target;

      if (result_.mass_clipped > 1e-8 * mass_u0_ * (state.t - t0)) {
        return crash("clipped mass " + std::to_string(result_.mass_clipped) + " exceeds 1e-8 int u0 per unit time");
      }

      if (state.t >= next_snapshot()) {
        if (observer_) observer_->on_snapshot(state);
        ++snap_k;
      }
      if (state.t >= next_sample()) {
        emit_record(state);
        ++sample_k;
        if (opts_.stop_at_steady && detect_steady(result_.series, mass_v0_, opts_.steady)) {
          result_.reason = Termination::Steady;
          return std::move(result_);
        }
      }
    }
    result_.reason = Termination::Horizon;
    return std::move(result_);
  }

 private:
  RunResult crash(const std::string& why) {
    result_.reason = Termination::Instability;
    result_.message = why;
    result_.crash_state = result_.final_state;
    if (observer_) observer_->on_crash(result_.final_state);
    return std::move(result_);
  }

  void emit_record(const State& s) {
    DiagnosticsRecord r = compute_record(s, opts_.diagnostics);
    r.cumulative_consumption = result_.cumulative_consumption;
    r.clip_budget = result_.mass_clipped;
    if (track_dual_) {
      r.dual_dist_u0 = dual_norm(s.u - u0_).value;
      if (!result_.series.empty()) r.dual_step = dual_norm(s.u - last_sample_).value;
    }
    if (opts_.track_budgets) r.dissipation_budgets = result_.budgets;
    if (track_dual_) last_sample_ = s.u;
    if (opts_.keep_samples) result_.u_samples.push_back(s.u);
    if (observer_) observer_->on_record(r);
    result_.series.push_back(std::move(r));
  }

  const Params& p_;
  const RunOptions& opts_;
  RunObserver* observer_;
  Field u0_;
  Field last_sample_;
  double mass_u0_ = 0.0;
  double mass_v0_ = 0.0;
  bool track_dual_ = false;
  RunResult result_;
};

}  // namespace

RunResult run(const State& initial, const Params& p, const RunOptions& opts, RunObserver* observer) {
  p.validate();
  validate_state(initial);
  if (opts.certify && !p.theory_window()) {
    RunResult r;
    r.final_state = initial;
    r.reason = Termination::RegimeViolation;
    r.message = "alpha = " + std::to_string(p.alpha) + " lies outside (3/2, 19/12)";
    return r;
  }
  if (!(opts.horizon > 0.0)) {
    RunResult r;
    r.final_state = initial;
    r.reason = Termination::Horizon;
    return r;
  }
  return RunLoop(initial, p, opts, observer).execute();
}

}  // namespace degentaxis
