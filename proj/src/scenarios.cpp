#include "degentaxis/scenarios.hpp"

#include <algorithm>
#include <cmath>

#include "degentaxis/dualnorm.hpp"
#include "degentaxis/error.hpp"
#include "degentaxis/inequalities.hpp"
#include "degentaxis/parallel.hpp"

namespace degentaxis {
namespace {

Field evaluate_recipe(const Grid& g, const Recipe& r, std::uint64_t seed, const char* name) {
  const std::string who(name);
  if (!(r.level >= 0.0) || !std::isfinite(r.level)) throw InvalidArgument(who + ": level must be >= 0");
  if (!(r.floor >= 0.0) || !std::isfinite(r.floor)) throw InvalidArgument(who + ": floor must be >= 0");

  switch (r.kind) {
    case RecipeKind::Constant:
      return Field(g, r.floor + r.level);
    case RecipeKind::TwoBump: {
      if (!(r.width > 0.0)) throw InvalidArgument(who + ": width must be > 0");
      const double c1[3] = {0.3, 0.35, 0.5};
      const double c2[3] = {0.7, 0.65, 0.5};
      return sample_field(g, [&](double x, double y, double z) {
        const double pos[3] = {x / g.extents[0], y / g.extents[1], z / g.extents[2]};
        double d1 = 0.0;
        double d2 = 0.0;
        for (int a = 0; a < g.dim; ++a) {
          d1 += (pos[a] - c1[a]) * (pos[a] - c1[a]);
          d2 += (pos[a] - c2[a]) * (pos[a] - c2[a]);
        }
        const double s2 = 2.0 * r.width * r.width;
        return r.floor + r.level * (std::exp(-d1 / s2) + std::exp(-d2 / s2));
      });
    }
    case RecipeKind::CosineMix:
      return sample_field(g, [&](double x, double y, double z) {
        const double pos[3] = {x, y, z};
        double c = 0.0;
        for (int a = 0; a < g.dim; ++a) c += std::cos(M_PI * pos[a] / g.extents[a]);
        return r.floor + r.level * (1.0 + 0.5 * c / g.dim);
      });
    case RecipeKind::SeededRandom: {
      if (r.modes < 0) throw InvalidArgument(who + ": modes must be >= 0");
      Field f = sample_positive_field(g, seed, r.modes, 1.0);
      const double hi = *std::max_element(f.values.begin(), f.values.end());
      for (double& x : f.values) x = r.floor + r.level * (hi > 1.0 ? (x - 1.0) / (hi - 1.0) : 1.0);
      return f;
    }
  }
  throw InvalidArgument(who + ": unknown recipe");
}

double mean_of(const Field& f) { return integrate(f) / f.grid.volume(); }

double max_of(const Field& f) { return *std::max_element(f.values.begin(), f.values.end()); }

}  // namespace

std::string to_string(RecipeKind k) {
  switch (k) {
    case RecipeKind::Constant: return "constant";
    case RecipeKind::TwoBump: return "two-bump";
    case RecipeKind::CosineMix: return "cosine-mix";
    case RecipeKind::SeededRandom: return "seeded-random";
  }
  return "?";
}

RecipeKind recipe_from_string(const std::string& s) {
  for (auto k : {RecipeKind::Constant, RecipeKind::TwoBump, RecipeKind::CosineMix, RecipeKind::SeededRandom}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown recipe '" + s + "' (expected constant, two-bump, cosine-mix or seeded-random)");
}

InitialData make_initial_data(const Grid& grid, const InitialDataSpec& spec, double eps) {
  if (!(spec.v0_scale > 0.0) || !std::isfinite(spec.v0_scale)) throw InvalidArgument("v0_scale must be > 0");
  if (!(eps >= 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in [0, 1)");

  InitialData d;
  d.u0 = evaluate_recipe(grid, spec.u0, spec.seed, "u0");
  d.v0 = evaluate_recipe(grid, spec.v0, spec.seed ^ 0x5bd1e995ULL, "v0");
  for (double& x : d.v0.values) x *= spec.v0_scale;
  for (double& x : d.u0.values) x += eps;

  if (max_of(d.u0) <= 0.0) throw InvalidArgument("u0 vanishes identically");
  for (double x : d.v0.values) {
    if (!(x > 0.0)) throw InvalidArgument("v0 must be strictly positive");
  }

  Field log_v(grid);
  for (std::size_t i = 0; i < log_v.size(); ++i) log_v[i] = std::log(d.v0[i]);
  d.K = max_of(d.u0) + max_of(d.v0) + max_of(cell_gradient_magnitude(log_v));

  const double min_u = *std::min_element(d.u0.values.begin(), d.u0.values.end());
  if (min_u > 0.0) {
    Field log_u(grid);
    for (std::size_t i = 0; i < log_u.size(); ++i) log_u[i] = std::log(d.u0[i]);
    d.log_mass_u0 = integrate(log_u);
  }
  return d;
}

double dual_distance_to_mean(const Field& f) {
  Field centered = f;
  const double m = mean_of(f);
  for (double& x : centered.values) x -= m;
  return dual_norm(centered).value;
}

double spatial_variance(const Field& f) {
  Field sq = f;
  const double m = mean_of(f);
  for (double& x : sq.values) x = (x - m) * (x - m);
  return integrate(sq) / f.grid.volume();
}

Verdicts compute_verdicts(const StabilizationReport& r) {
  Verdicts v;
  if (r.series.empty()) return v;
  double peak = 0.0;
  for (const auto& rec : r.series) peak = std::max(peak, std::sqrt(rec.grad_v_l2));
  const auto& last = r.series.back();
  v.v_decay = last.mass_v < 1e-6 * r.initial_mass_v && std::sqrt(last.grad_v_l2) <= 1e-4 * peak;
  for (std::size_t k = 1; k < r.series.size(); ++k) {
    const std::span<const DiagnosticsRecord> window(r.series.data(), k + 1);
    if (detect_steady(window, r.initial_mass_v, r.steady)) {
      v.steady_time = r.series[k].t;
      break;
    }
  }
  v.nonconstant = r.u0_dist_to_mean > 0.0 && r.final_dist_to_mean >= r.nonconstancy_fraction * r.u0_dist_to_mean;
  return v;
}

StabilizationReport stabilization_experiment(const Grid& grid, const InitialDataSpec& spec, const Params& p,
                                             const StabilizationOptions& opts) {
  const InitialData data = make_initial_data(grid, spec, p.eps);

  RunOptions ro;
  ro.horizon = opts.horizon;
  ro.sample_cadence = opts.sample_cadence;
  ro.stop_at_steady = opts.stop_at_steady;
  ro.steady = opts.steady;
  ro.certify = opts.certify;
  ro.track_budgets = opts.track_budgets;
  ro.keep_samples = opts.keep_samples;
  ro.diagnostics = opts.diagnostics;
  ro.diagnostics.dual_norm = true;

  RunResult run_result = run(State{data.u0, data.v0, 0.0}, p, ro);

  StabilizationReport r;
  r.reason = run_result.reason;
  r.message = run_result.message;
  r.initial_mass_v = integrate(data.v0);
  r.K = data.K;
  r.nonconstancy_fraction = opts.nonconstancy_fraction;
  r.steady = opts.steady;
  r.u0_dist_to_mean = dual_distance_to_mean(data.u0);
  r.final_dist_to_mean = dual_distance_to_mean(run_result.final_state.u);
  r.final_variance_u = spatial_variance(run_result.final_state.u);
  for (const auto& rec : run_result.series) {
    if (rec.dual_dist_u0) r.max_dual_dist_u0 = std::max(r.max_dual_dist_u0, *rec.dual_dist_u0);
  }
  if (!run_result.series.empty() && run_result.series.back().dual_dist_u0) {
    r.final_dual_dist_u0 = *run_result.series.back().dual_dist_u0;
  }
  r.series = std::move(run_result.series);
  r.final_state = std::move(run_result.final_state);
  r.u_samples = std::move(run_result.u_samples);
  r.budgets = run_result.budgets;
  r.steps = run_result.steps;
  r.verdicts = compute_verdicts(r);
  return r;
}

nlohmann::ordered_json to_json(const StabilizationReport& r) {
  nlohmann::ordered_json j;
  j["reason"] = to_string(r.reason);
  j["message"] = r.message;
  j["initial_mass_v"] = r.initial_mass_v;
  j["K"] = r.K;
  j["final_dual_dist_u0"] = r.final_dual_dist_u0;
  j["max_dual_dist_u0"] = r.max_dual_dist_u0;
  j["final_variance_u"] = r.final_variance_u;
  j["u0_dist_to_mean"] = r.u0_dist_to_mean;
  j["final_dist_to_mean"] = r.final_dist_to_mean;
  j["nonconstancy_fraction"] = r.nonconstancy_fraction;
  j["tol_v"] = r.steady.tol_v;
  j["tol_u"] = r.steady.tol_u;
  j["steps"] = r.steps;
  j["verdicts"] = {{"v_decay", r.verdicts.v_decay},
                   {"steady_time", r.verdicts.steady_time ? nlohmann::ordered_json(*r.verdicts.steady_time)
                                                          : nlohmann::ordered_json(nullptr)},
                   {"nonconstant", r.verdicts.nonconstant}};
  auto series = nlohmann::ordered_json::array();
  for (const auto& rec : r.series) series.push_back(to_json(rec));
  j["series"] = std::move(series);
  return j;
}

StabilizationReport report_from_json(const nlohmann::json& j) {
  StabilizationReport r;
  const std::string reason = j.at("reason").get<std::string>();
  for (auto t : {Termination::Horizon, Termination::Steady, Termination::Instability, Termination::RegimeViolation}) {
    if (to_string(t) == reason) r.reason = t;
  }
  r.message = j.at("message").get<std::string>();
  r.initial_mass_v = j.at("initial_mass_v").get<double>();
  r.K = j.at("K").get<double>();
  r.final_dual_dist_u0 = j.at("final_dual_dist_u0").get<double>();
  r.max_dual_dist_u0 = j.at("max_dual_dist_u0").get<double>();
  r.final_variance_u = j.at("final_variance_u").get<double>();
  r.u0_dist_to_mean = j.at("u0_dist_to_mean").get<double>();
  r.final_dist_to_mean = j.at("final_dist_to_mean").get<double>();
  r.nonconstancy_fraction = j.at("nonconstancy_fraction").get<double>();
  r.steady.tol_v = j.at("tol_v").get<double>();
  r.steady.tol_u = j.at("tol_u").get<double>();
  r.steps = j.at("steps").get<std::size_t>();
  const auto& v = j.at("verdicts");
  r.verdicts.v_decay = v.at("v_decay").get<bool>();
  if (!v.at("steady_time").is_null()) r.verdicts.steady_time = v.at("steady_time").get<double>();
  r.verdicts.nonconstant = v.at("nonconstant").get<bool>();
  for (const auto& rec : j.at("series")) r.series.push_back(record_from_json(rec));
  return r;
}

SweepReport v0_sweep(const Grid& grid, const InitialDataSpec& spec, const std::vector<double>& scales,
                     const Params& p, const StabilizationOptions& opts) {
  if (scales.size() < 3) throw InvalidArgument("v0_sweep needs at least three scales");
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("v0_sweep scales must be > 0");
  }
  const auto [lo, hi] = std::minmax_element(scales.begin(), scales.end());
  if (*hi < 100.0 * *lo * (1.0 - 1e-12)) throw InvalidArgument("v0_sweep scales must span two decades");

  SweepReport report;
  report.legs.resize(scales.size());
  // Legs are independent runs; each writes only its own slot.
  parallel_for(
      scales.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
          InitialDataSpec leg_spec = spec;
          leg_spec.v0_scale = spec.v0_scale * scales[k];
          const StabilizationReport r = stabilization_experiment(grid, leg_spec, p, opts);
          SweepLeg& leg = report.legs[k];
          leg.scale = scales[k];
          leg.mass_v0 = r.initial_mass_v;
          for (const auto& rec : r.series) leg.variation += rec.dual_step.value_or(0.0);
          leg.final_dual_dist_u0 = r.final_dual_dist_u0;
          leg.max_dual_dist_u0 = r.max_dual_dist_u0;
          leg.u0_dist_to_mean = r.u0_dist_to_mean;
          leg.final_dist_to_mean = r.final_dist_to_mean;
          leg.reason = r.reason;
          leg.cumulative_consumption = r.series.empty() ? 0.0 : r.series.back().cumulative_consumption;
          leg.budgets = r.budgets;
          leg.verdicts = r.verdicts;
        }
      },
      1);
  fit_sweep(report);
  return report;
}

void fit_sweep(SweepReport& report) {
  report.flags.clear();
  report.sigma_hat.reset();
  report.log_c.reset();
  // V should grow with the nutrient mass.
  std::vector<std::size_t> order(report.legs.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return report.legs[a].scale < report.legs[b].scale; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (report.legs[order[k]].variation < report.legs[order[k - 1]].variation) {
      report.flags.push_back("variation not monotone in the v0 scale");
      break;
    }
  }
  for (const auto& leg : report.legs) {
    if (leg.reason == Termination::Horizon && !leg.verdicts.steady_time) {
      report.flags.push_back("horizon reached before steady state at scale " + std::to_string(leg.scale));
    }
  }

  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  int n = 0;
  for (const auto& leg : report.legs) {
    if (!(leg.variation > 0.0)) continue;
    const double x = std::log(leg.mass_v0);
    const double y = std::log(leg.variation);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double det = n * sxx - sx * sx;
  if (n >= 2 && det > 0.0) {
    report.sigma_hat = (n * sxy - sx * sy) / det;
    report.log_c = (sy - *report.sigma_hat * sx) / n;
  } else {
    report.flags.push_back("sigma_hat undefined: fewer than two legs with positive variation");
  }
}

nlohmann::ordered_json to_json(const SweepReport& r) {
  nlohmann::ordered_json j;
  auto legs = nlohmann::ordered_json::array();
  for (const auto& leg : r.legs) {
    nlohmann::ordered_json l;
    l["scale"] = leg.scale;
    l["mass_v0"] = leg.mass_v0;
    l["variation"] = leg.variation;
    l["final_dual_dist_u0"] = leg.final_dual_dist_u0;
    l["max_dual_dist_u0"] = leg.max_dual_dist_u0;
    l["u0_dist_to_mean"] = leg.u0_dist_to_mean;
    l["final_dist_to_mean"] = leg.final_dist_to_mean;
    l["reason"] = to_string(leg.reason);
    l["cumulative_consumption"] = leg.cumulative_consumption;
    nlohmann::ordered_json b;
    for (const auto& [name, value] : leg.budgets.entries()) b[name] = value;
    l["budgets"] = std::move(b);
    l["v_decay"] = leg.verdicts.v_decay;
    l["steady_time"] = leg.verdicts.steady_time ? nlohmann::ordered_json(*leg.verdicts.steady_time)
                                                : nlohmann::ordered_json(nullptr);
    l["nonconstant"] = leg.verdicts.nonconstant;
    legs.push_back(std::move(l));
  }
  j["legs"] = std::move(legs);
  j["sigma_hat"] = r.sigma_hat ? nlohmann::ordered_json(*r.sigma_hat) : nlohmann::ordered_json(nullptr);
  j["log_c"] = r.log_c ? nlohmann::ordered_json(*r.log_c) : nlohmann::ordered_json(nullptr);
  j["flags"] = r.flags;
  return j;
}

}  // namespace degentaxis
