#include "degentaxis/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>

#include "degentaxis/dualnorm.hpp"
#include "degentaxis/io.hpp"

namespace degentaxis {
namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

nlohmann::ordered_json params_json(const Params& p) {
  return {{"chi", p.chi},
          {"ell", p.ell},
          {"alpha", p.alpha},
          {"eps", p.eps},
          {"safety", p.safety},
          {"dt_max", p.dt_max},
          {"clip_policy", to_string(p.clip_policy)},
          {"mobility", to_string(p.mobility)},
          {"theory_window", p.theory_window()}};
}

class SeriesSink : public RunObserver {
 public:
  SeriesSink(const RunConfig& cfg, const std::filesystem::path& out) : cfg_(cfg), out_(out) {
    if (cfg.output.ndjson) writer_.emplace(out / "series.ndjson");
  }
  void on_record(const DiagnosticsRecord& r) override {
    if (writer_) writer_->write(to_json(r));
  }
  void on_snapshot(const State& s) override {
    if (!cfg_.output.snapshot) return;
    char name[32];
    std::snprintf(name, sizeof name, "snap_%05d.snap", count_++);
    write_snapshot(out_ / name, s);
  }
  void on_crash(const State& s) override { write_snapshot(out_ / "crash.snap", s); }

 private:
  const RunConfig& cfg_;
  std::filesystem::path out_;
  std::optional<NdjsonWriter> writer_;
  int count_ = 0;
};

void prepare(const RunConfig& cfg, const std::filesystem::path& out, const std::string& command) {
  std::filesystem::create_directories(out);
  write_json_file(out / "manifest.json", make_manifest(cfg, command));
}

}  // namespace

nlohmann::ordered_json make_manifest(const RunConfig& cfg, const std::string& command) {
  nlohmann::ordered_json m;
  m["format_version"] = kFormatVersion;
  m["tool"] = "degentaxis";
  m["version"] = kVersion;
  m["command"] = command;
  m["config_hash"] = "fnv1a64:" + hex64(fnv1a64(cfg.source));
  m["seed"] = cfg.initial.seed;
  m["grid"] = {{"dim", cfg.grid.dim},
               {"cells", cfg.grid.cells},
               {"extents", cfg.grid.extents},
               {"header", snapshot_header(cfg.grid, 0.0)}};
  m["params"] = params_json(cfg.params);
  return m;
}

int command_run(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  prepare(cfg, out, "run");
  const InitialData data = make_initial_data(cfg.grid, cfg.initial, cfg.params.eps);
  SeriesSink sink(cfg, out);
  const RunResult r = run(State{data.u0, data.v0, 0.0}, cfg.params, run_options(cfg), &sink);
  if (cfg.output.snapshot) write_snapshot(out / "final.snap", r.final_state);

  log << "termination: " << to_string(r.reason) << (r.message.empty() ? "" : " (" + r.message + ")") << '\n';
  log << "steps: " << r.steps << ", t = " << fmt(r.final_state.t) << '\n';
  if (!r.series.empty()) {
    const auto& last = r.series.back();
    log << "mass_u = " << fmt(last.mass_u) << ", mass_v = " << fmt(last.mass_v)
        << ", consumption = " << fmt(last.cumulative_consumption) << ", clipped = " << fmt(last.clip_budget) << '\n';
    log << "mean u = " << fmt(last.mass_u / cfg.grid.volume()) << ", mean v = " << fmt(last.mass_v / cfg.grid.volume())
        << '\n';
  }
  return r.reason == Termination::Horizon || r.reason == Termination::Steady ? kExitOk : kExitError;
}

int command_steady(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  prepare(cfg, out, "steady");
  StabilizationOptions opts = stabilization_options(cfg);
  opts.stop_at_steady = true;
  const StabilizationReport r = stabilization_experiment(cfg.grid, cfg.initial, cfg.params, opts);
  if (r.reason == Termination::RegimeViolation || r.reason == Termination::Instability) {
    log << "termination: " << to_string(r.reason) << " (" << r.message << ")\n";
    return kExitError;
  }
  if (cfg.output.ndjson) {
    NdjsonWriter w(out / "series.ndjson");
    for (const auto& rec : r.series) w.write(to_json(rec));
  }
  write_json_file(out / "report.json", to_json(r));
  if (cfg.output.snapshot) write_snapshot(out / "final.snap", r.final_state);

  log << "termination: " << to_string(r.reason) << ", steps: " << r.steps << '\n';
  log << "v decay: " << (r.verdicts.v_decay ? "yes" : "no") << ", steady at t = "
      << (r.verdicts.steady_time ? fmt(*r.verdicts.steady_time) : std::string("never")) << '\n';
  log << "||u_end - u0||_* = " << fmt(r.final_dual_dist_u0) << ", max over t = " << fmt(r.max_dual_dist_u0) << '\n';
  log << "||u_end - mean||_* = " << fmt(r.final_dist_to_mean) << " vs ||u0 - mean||_* = " << fmt(r.u0_dist_to_mean)
      << " (non-constant: " << (r.verdicts.nonconstant ? "yes" : "no") << ")\n";
  return r.verdicts.v_decay && r.verdicts.steady_time ? kExitOk : kExitVerdict;
}

int command_sweep(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  prepare(cfg, out, "sweep");
  StabilizationOptions opts = stabilization_options(cfg);
  opts.stop_at_steady = true;
  const SweepReport r = v0_sweep(cfg.grid, cfg.initial, cfg.sweep_scales, cfg.params, opts);
  write_json_file(out / "sweep.json", to_json(r));

  log << "scale        int v0       V            ||u_end-u0||_*  ||u_end-mean||_*  reason\n";
  for (const auto& leg : r.legs) {
    char line[256];
    std::snprintf(line, sizeof line, "%-12.4g %-12.6g %-12.6g %-15.6g %-17.6g %s\n", leg.scale, leg.mass_v0,
                  leg.variation, leg.final_dual_dist_u0, leg.final_dist_to_mean, to_string(leg.reason).c_str());
    log << line;
  }
  log << "sigma_hat = " << (r.sigma_hat ? fmt(*r.sigma_hat) : std::string("undefined")) << '\n';
  for (const auto& f : r.flags) log << "flag: " << f << '\n';
  for (const auto& leg : r.legs) {
    if (leg.reason == Termination::Instability || leg.reason == Termination::RegimeViolation) return kExitError;
  }
  const bool monotone = std::none_of(r.flags.begin(), r.flags.end(),
                                     [](const std::string& f) { return f.rfind("variation not monotone", 0) == 0; });
  return r.sigma_hat && *r.sigma_hat > 0.0 && monotone ? kExitOk : kExitVerdict;
}

int command_verify_inequalities(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  prepare(cfg, out, "verify-inequalities");
  const InequalityConfig& ic = cfg.inequalities;
  HuntOptions opts;
  opts.budget = ic.samples;
  opts.seed = ic.seed;
  opts.c_cap = ic.c_cap;
  opts.refinement = ic.refinement;
  opts.sampler = ic.sampler;

  std::optional<std::ofstream> csv;
  if (cfg.output.csv) {
    csv.emplace(out / "inequalities.csv", std::ios::trunc);
    *csv << inequality_csv_header() << '\n';
  }
  auto summary = nlohmann::ordered_json::array();
  int violations = 0;
  for (const auto& [kind, e] : ic.cases) {
    const std::vector<HuntEntry> entries = violation_hunt(cfg.grid, kind, {e}, opts);
    const HuntEntry& h = entries.front();
    nlohmann::ordered_json row;
    row["inequality"] = to_string(kind);
    row["admissible"] = h.admissible;
    row["violated_hypotheses"] = h.violations;
    if (h.admissible) {
      row["c_hat"] = h.c_hat;
      row["c_hat_check"] = h.c_hat_check;
      row["c_cap"] = h.c_cap;
      row["violations"] = h.violation_count;
      row["violating_seeds"] = h.violating_seeds;
      violations += h.violation_count;
      log << to_string(kind) << ": C_hat = " << fmt(h.c_hat) << " (check batch " << fmt(h.c_hat_check)
          << "), violations at C_cap = " << fmt(h.c_cap) << ": " << h.violation_count << '\n';
    } else {
      auto refine = nlohmann::ordered_json::array();
      for (const auto& [n, c] : h.refinement) refine.push_back({n, c});
      row["refinement"] = std::move(refine);
      log << to_string(kind) << ": inadmissible (";
      for (std::size_t i = 0; i < h.violations.size(); ++i) log << (i ? "; " : "") << h.violations[i];
      log << "); C_hat by cells per axis:";
      for (const auto& [n, c] : h.refinement) log << ' ' << n << ':' << fmt(c);
      log << '\n';
    }
    summary.push_back(std::move(row));
    if (csv) {
      for (const auto& c : h.cases) *csv << inequality_csv_row(c) << '\n';
    }
  }
  write_json_file(out / "inequalities.json", summary);
  return violations == 0 ? kExitOk : kExitVerdict;
}

int command_dual_norm(const std::filesystem::path& a, const std::filesystem::path& b, std::ostream& log) {
  const State sa = read_snapshot(a);
  const State sb = read_snapshot(b);
  if (!(sa.u.grid == sb.u.grid)) throw InvalidArgument("snapshots live on different grids");
  const DualNormResult r = dual_norm(sa.u - sb.u);
  char line[128];
  std::snprintf(line, sizeof line, "%.17g\n", r.value);
  log << line;
  return kExitOk;
}

}  // namespace degentaxis
