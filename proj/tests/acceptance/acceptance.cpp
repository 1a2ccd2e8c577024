// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.
//
//   acceptance [--cli PATH] [--configs DIR] [--scratch DIR] [criteria...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "degentaxis/dualnorm.hpp"
#include "degentaxis/inequalities.hpp"
#include "degentaxis/scenarios.hpp"
#include "degentaxis/stepper.hpp"

using namespace degentaxis;
namespace fs = std::filesystem;

namespace {

// Tolerances and limits, one block per criterion.
constexpr double kLogisticV = 0.238406;
constexpr double kLogisticU = 1.761594;
constexpr double kLogisticTol = 1e-4;
constexpr double kLogisticSeconds = 30.0;

constexpr double kHeatTol = 1e-3;
constexpr double kHeatSeconds = 10.0;

constexpr int kBudgetSeeds = 20;
constexpr int kBudgetSteps = 10000;
constexpr double kBudgetMassTol = 1e-12;
constexpr double kBudgetConsumptionSlack = 1e-10;
constexpr double kBudgetSeconds = 120.0;

constexpr double kGrowthFactor = 10.0;
constexpr double kPlateauFraction = 0.01;
constexpr double kDecayMass = 1e-6;
constexpr double kDecayGradient = 1e-4;
constexpr double kBoundednessSeconds = 600.0;

constexpr double kNonconstancyFraction = 0.5;
constexpr double kSweepSeconds = 1800.0;

constexpr int kLatticeLevels = 41;
constexpr double kDualGap = 1e-6;
constexpr double kDualSeconds = 120.0;

constexpr int kInequalitySamples = 100;
constexpr int kInequalityCells = 64;
constexpr double kCapFactor = 2.0;
constexpr double kBatchAgreement = 0.2;
constexpr double kInequalitySeconds = 300.0;

constexpr double kDeterminismSeconds = 300.0;

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "FAILED ") + what);
  }
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string sci(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

Grid make_box(int dim, int n) {
  const std::vector<int> cells(dim, n);
  const std::vector<double> extents(dim, 1.0);
  return make_grid(dim, cells, extents);
}

double max_of(const Field& f) { return *std::max_element(f.values.begin(), f.values.end()); }
double min_of(const Field& f) { return *std::min_element(f.values.begin(), f.values.end()); }

// 1. Homogeneous data against the logistic pair.
Verdict homogeneous_logistic() {
  Verdict v;
  const Grid g = make_box(2, 32);
  Params p;
  p.chi = 1.0;
  p.ell = 1.0;
  p.alpha = 1.55;
  p.dt_max = 1e-4;
  RunOptions o;
  o.horizon = 1.0;
  o.sample_cadence = 0.0;
  const RunResult r = run(State{Field(g, 1.0), Field(g, 1.0), 0.0}, p, o);
  const double ev = std::max(std::abs(max_of(r.final_state.v) - kLogisticV), std::abs(min_of(r.final_state.v) - kLogisticV));
  const double eu = std::max(std::abs(max_of(r.final_state.u) - kLogisticU), std::abs(min_of(r.final_state.u) - kLogisticU));
  v.require(r.reason == Termination::Horizon && r.final_state.t == 1.0, "reached t = 1 in " + std::to_string(r.steps) + " steps");
  v.require(ev <= kLogisticTol, "max |v - 0.238406| = " + num(ev));
  v.require(eu <= kLogisticTol, "max |u - 1.761594| = " + num(eu));
  return v;
}

// 2. Nutrient solver alone against a decaying Neumann eigenmode.
Verdict heat_mode() {
  Verdict v;
  const Grid g = make_box(1, 128);
  Params p;
  p.dt_max = 1e-5;
  RunOptions o;
  o.horizon = 0.1;
  o.sample_cadence = 0.0;
  const double pi = std::numbers::pi;
  const Field v0 = sample_field(g, [&](double x, double, double) { return 1.0 + 0.5 * std::cos(pi * x); });
  const RunResult r = run(State{Field(g, 0.0), v0, 0.0}, p, o);
  const double amp = 0.5 * std::exp(-pi * pi * 0.1);
  double err = 0.0;
  for (int i = 0; i < 128; ++i)
    err = std::max(err, std::abs(r.final_state.v[i] - (1.0 + amp * std::cos(pi * g.center(0, i)))));
  v.require(err <= kHeatTol, "L-inf error at t = 0.1: " + num(err));
  return v;
}

// 3. Discrete budgets over random data.
Verdict budgets() {
  Verdict v;
  double worst_mass = 0.0;
  double worst_consumption = -1e300;
  int v_increase = 0, vmax_increase = 0, nonpositive = 0;
  for (int seed = 1; seed <= kBudgetSeeds; ++seed) {
    const Grid g = seed % 2 ? make_box(2, 8) : make_box(1, 24);
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::uniform_real_distribution<double> du(0.0, 2.0), dv(0.05, 1.5), dchi(0.5, 3.0);
    State s{Field(g), Field(g), 0.0};
    for (auto& x : s.u.values) x = du(rng);
    for (auto& x : s.v.values) x = dv(rng);
    Params p;
    p.chi = dchi(rng);
    const double v0 = integrate(s.v);
    double consumed = 0.0;
    for (int k = 0; k < kBudgetSteps; ++k) {
      const double mu = integrate(s.u), mv = integrate(s.v), vmax = max_of(s.v);
      auto [next, rep] = step(s, p, stable_dt(s, p));
      const double mu1 = integrate(next.u), mv1 = integrate(next.v);
      worst_mass = std::max(worst_mass, std::abs(mu1 - mu - p.ell * rep.consumption - rep.mass_clipped) / mu1);
      if (mv1 > mv) ++v_increase;
      if (rep.max_v > vmax) ++vmax_increase;
      if (!(rep.min_v > 0.0)) ++nonpositive;
      consumed += rep.consumption;
      s = std::move(next);
    }
    worst_consumption = std::max(worst_consumption, consumed - v0);
  }
  v.require(worst_mass <= kBudgetMassTol, "worst relative u-mass defect " + num(worst_mass));
  v.require(v_increase == 0, "int v increases: " + std::to_string(v_increase));
  v.require(vmax_increase == 0, "max v increases: " + std::to_string(vmax_increase));
  v.require(nonpositive == 0, "steps with min v <= 0: " + std::to_string(nonpositive));
  v.require(worst_consumption <= kBudgetConsumptionSlack, "max (sum dt int u v_new - int v0) = " + num(worst_consumption));
  return v;
}

InitialDataSpec two_bump_spec() {
  InitialDataSpec spec;
  spec.u0 = Recipe{RecipeKind::TwoBump, 1.0, 0.1, 0.1, 3};
  spec.v0 = Recipe{RecipeKind::Constant, 1.0, 0.0, 0.1, 3};
  return spec;
}

// 4 and 5. Two-bump run on 64^2 to t = 50.
std::pair<Verdict, Verdict> boundedness_and_stabilization() {
  Verdict b, s;
  Params p;
  p.alpha = 1.55;
  StabilizationOptions o;
  o.horizon = 50.0;
  o.sample_cadence = 0.5;
  o.stop_at_steady = false;
  o.certify = true;
  o.track_budgets = true;
  o.diagnostics = default_diagnostics(p.alpha);
  const StabilizationReport r = stabilization_experiment(make_box(2, 64), two_bump_spec(), p, o);
  b.require(r.reason == Termination::Horizon, "termination " + to_string(r.reason) + " after " + std::to_string(r.steps) + " steps");

  auto lp = [](const DiagnosticsRecord& rec, double q) {
    for (const auto& [e, val] : rec.lp_norms)
      if (e == q) return val;
    return std::nan("");
  };
  struct Series {
    const char* name;
    std::function<double(const DiagnosticsRecord&)> value;
  };
  const Series tracked[] = {{"int u^2", [&](const DiagnosticsRecord& x) { return lp(x, 2.0); }},
                            {"int u^4", [&](const DiagnosticsRecord& x) { return lp(x, 4.0); }},
                            {"H", [](const DiagnosticsRecord& x) { return x.H; }}};
  for (const auto& t : tracked) {
    double first = 0.0, early = 0.0, late = 0.0;
    for (const auto& rec : r.series) {
      const double x = t.value(rec);
      if (rec.t <= 1.0) first = std::max(first, x);
      if (rec.t >= 1.0 && rec.t <= 5.0) early = std::max(early, x);
      if (rec.t >= 5.0) late = std::max(late, x);
    }
    // No sustained growth: over the last decade [5, 50] the running maximum
    // grows by less than the factor. The ratio to [0, 1] is printed only; it
    // mostly reflects nutrient mass turned into cells.
    b.require(std::isfinite(late) && late <= kGrowthFactor * early,
              std::string(t.name) + ": max over [5,50] " + num(late) + " vs max over [1,5] " + num(early) +
                  " (x" + num(late / first) + " over max on [0,1])");
  }

  DissipationBudgets at5{};
  for (const auto& rec : r.series)
    if (rec.t <= 5.0 && rec.dissipation_budgets) at5 = *rec.dissipation_budgets;
  const auto total = r.budgets.entries();
  const auto early = at5.entries();
  for (std::size_t k = 0; k < total.size(); ++k) {
    const double inc = total[k].second - early[k].second;
    b.require(inc <= kPlateauFraction * total[k].second,
              std::string(total[k].first) + " increase over [5,50] " + sci(inc) + " of " + num(total[k].second));
  }

  double peak = 0.0;
  for (const auto& rec : r.series) peak = std::max(peak, std::sqrt(rec.grad_v_l2));
  const auto& last = r.series.back();
  s.require(last.mass_v < kDecayMass * r.initial_mass_v, "int v(50) / int v0 = " + num(last.mass_v / r.initial_mass_v));
  s.require(std::sqrt(last.grad_v_l2) < kDecayGradient * peak,
            "||grad v(50)|| / peak = " + num(std::sqrt(last.grad_v_l2) / peak));
  s.require(r.verdicts.v_decay, "v-decay verdict");
  s.require(r.verdicts.steady_time.has_value(),
            "steady state detected at t = " + (r.verdicts.steady_time ? num(*r.verdicts.steady_time) : std::string("never")));
  return {b, s};
}

// 6. Non-constancy for small nutrient mass.
Verdict small_nutrient() {
  Verdict v;
  StabilizationOptions o;
  o.horizon = 100.0;
  o.sample_cadence = 0.5;
  o.nonconstancy_fraction = kNonconstancyFraction;
  const SweepReport r = v0_sweep(make_box(2, 32), two_bump_spec(), {1.0, 0.1, 0.01}, Params{}, o);
  std::string dists;
  bool decreasing = true;
  for (std::size_t k = 0; k < r.legs.size(); ++k) {
    dists += (k ? ", " : "") + num(r.legs[k].final_dual_dist_u0);
    if (k && !(r.legs[k].final_dual_dist_u0 < r.legs[k - 1].final_dual_dist_u0)) decreasing = false;
  }
  v.require(decreasing, "final ||u - u0||_* by scale: " + dists);
  const SweepLeg& small = r.legs.back();
  v.require(small.final_dist_to_mean >= kNonconstancyFraction * small.u0_dist_to_mean,
            "scale 0.01: ||u - mean||_* " + num(small.final_dist_to_mean) + " vs u0 " + num(small.u0_dist_to_mean));
  v.require(r.sigma_hat && *r.sigma_hat > 0.0, "sigma_hat = " + (r.sigma_hat ? num(*r.sigma_hat) : std::string("undefined")));
  for (const auto& leg : r.legs)
    v.require(leg.verdicts.steady_time.has_value(), "scale " + num(leg.scale) + " reached steady state");
  return v;
}

// 7. Dual norm.
Verdict dual_norm_checks() {
  Verdict v;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-1.0, 1.0);

  double worst_lattice = 0.0;
  bool lattice_ok = true;
  for (int n = 2; n <= 4; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      Field f(make_box(1, n));
      for (auto& x : f.values) x = d(rng);
      const double exact = dual_norm(f).value;
      const double lattice = lattice_oracle(f, kLatticeLevels);
      double l1 = 0.0;
      for (double x : f.values) l1 += std::abs(x) * f.grid.cell_volume();
      const double resolution = 2.0 / (kLatticeLevels - 1) * l1;
      worst_lattice = std::max(worst_lattice, exact - lattice);
      if (lattice > exact + 1e-12 || exact - lattice > resolution + 1e-12) lattice_ok = false;
    }
  }
  v.require(lattice_ok, "lattice oracle agreement, worst shortfall " + num(worst_lattice));

  bool constants_ok = true;
  for (double c : {-3.0, -0.5, 0.0, 1.0, 2.0}) {
    const Field f(make_box(2, 16), c);
    if (std::abs(dual_norm(f).value - std::abs(c)) > 1e-12) constants_ok = false;
  }
  v.require(constants_ok, "constant fields give |c| |Omega|");

  double worst_sign = 0.0;
  bool sign_ok = true;
  for (int n : {32, 64, 128, 256}) {
    const Field f = sample_field(make_box(1, n), [](double x, double, double) { return x < 0.5 ? -1.0 : 1.0; });
    const double err = std::abs(dual_norm(f).value - 0.25);
    worst_sign = std::max(worst_sign, err * n);
    if (err > 2.0 / n) sign_ok = false;
  }
  v.require(sign_ok, "sign(x - 1/2): worst |value - 1/4| / h = " + num(worst_sign));

  int broken = 0;
  double worst_gap = 0.0;
  const Grid g = make_box(2, 16);
  for (int trial = 0; trial < 100; ++trial) {
    Field f(g), h(g);
    for (auto& x : f.values) x = d(rng);
    for (auto& x : h.values) x = d(rng);
    const DualNormResult rf = dual_norm(f);
    const DualNormResult rh = dual_norm(h);
    const DualNormResult rs = dual_norm(f + h);
    worst_gap = std::max({worst_gap, std::abs(rf.duality_gap), std::abs(rh.duality_gap), std::abs(rs.duality_gap)});
    double l1 = 0.0;
    for (double x : f.values) l1 += std::abs(x) * g.cell_volume();
    const double c = 0.5 + 3.0 * std::abs(d(rng));
    const bool ok = std::abs(dual_norm(c * f).value - c * rf.value) <= kDualGap * std::max(1.0, c * rf.value) &&
                    rs.value <= rf.value + rh.value + kDualGap && rf.value <= l1 + kDualGap &&
                    rf.value >= std::abs(integrate(f)) - kDualGap;
    if (!ok) ++broken;
  }
  v.require(broken == 0, "norm axioms on 100 random fields, failures: " + std::to_string(broken));
  v.require(worst_gap <= kDualGap, "worst duality gap " + num(worst_gap));
  return v;
}

// 8. Inequality harness.
Verdict inequality_harness() {
  Verdict v;
  using K = InequalityKind;
  auto point = [](auto&& set) {
    InequalityExponents e;
    set(e);
    return e;
  };
  const std::vector<std::pair<K, std::vector<InequalityExponents>>> families = {
      {K::MassPower,
       {point([](auto& e) { e.p_star = 1.0; e.q = 1.0 / 3.0; e.bound = 10.0; }),
        point([](auto& e) { e.p_star = 1.5; e.q = 0.5; e.bound = 10.0; }),
        point([](auto& e) { e.p_star = 2.0; e.q = 2.0 / 3.0; e.bound = 10.0; })}},
      {K::LrProduct,
       {point([](auto& e) { e.p = 1.0; e.r = 2.0; e.eta = 0.5; }),
        point([](auto& e) { e.p = 0.5; e.r = 3.0; e.eta = 0.5; }),
        point([](auto& e) { e.p = 2.0; e.r = 4.0; e.eta = 0.5; })}},
      {K::QuarticSignal,
       {point([](auto& e) { e.k = -0.5; e.beta = 2.0; e.bound = 10.0; }),
        point([](auto& e) { e.k = -0.8; e.beta = 1.5; e.bound = 10.0; }),
        point([](auto& e) { e.k = -0.4; e.beta = 2.2; e.bound = 10.0; })}},
      {K::PowerSignal,
       {point([](auto& e) { e.p0 = 1.6; e.p = 2.0; e.q = 6.0; e.beta = 3.0; e.eta = 0.5; e.bound = 10.0; }),
        point([](auto& e) { e.p0 = 1.6; e.p = 1.5; e.q = 5.0; e.beta = 2.5; e.eta = 0.5; e.bound = 10.0; }),
        point([](auto& e) { e.p0 = 2.0; e.p = 1.2; e.q = 4.0; e.beta = 3.0; e.eta = 0.5; e.bound = 10.0; })}},
  };
  const Grid g = make_box(2, kInequalityCells);
  const Field one(g, 1.0);
  HuntOptions o;
  o.budget = kInequalitySamples;
  o.seed = 1;
  for (const auto& [kind, points] : families) {
    const auto entries = violation_hunt(g, kind, points, o);
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const HuntEntry& h = entries[k];
      const std::string tag = to_string(kind) + " #" + std::to_string(k + 1);
      const double forced = evaluate_inequality(kind, points[k], one, one).implied_constant;
      const double spread = std::abs(h.c_hat - h.c_hat_check) / std::max(h.c_hat, h.c_hat_check);
      const bool ok = h.admissible && h.violation_count == 0 && std::abs(forced - 1.0) <= 1e-12 && h.c_hat >= 1.0 &&
                      spread <= kBatchAgreement && std::abs(h.c_cap - kCapFactor * h.c_hat) <= 1e-12 * h.c_cap;
      v.require(ok, tag + ": C_hat " + num(h.c_hat) + " / " + num(h.c_hat_check) + ", violations " +
                        std::to_string(h.violation_count) + ", constant pair " + num(forced));
    }
  }
  return v;
}

// 9. Byte-identical NDJSON with one and eight threads, through the CLI.
Verdict determinism(const fs::path& cli, const fs::path& configs, const fs::path& scratch) {
  Verdict v;
  const fs::path config = configs / "determinism.ini";
  std::string bytes[2];
  const int threads[2] = {1, 8};
  for (int k = 0; k < 2; ++k) {
    const fs::path out = scratch / ("threads" + std::to_string(threads[k]));
    fs::remove_all(out);
    const std::string cmd = "\"" + cli.string() + "\" run --config \"" + config.string() + "\" --out \"" + out.string() +
                            "\" --threads " + std::to_string(threads[k]) + " > /dev/null";
    const int rc = std::system(cmd.c_str());
    v.require(rc == 0, "run with --threads " + std::to_string(threads[k]) + " exit status " + std::to_string(rc));
    std::ifstream in(out / "series.ndjson", std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    bytes[k] = ss.str();
  }
  const auto lines = std::count(bytes[0].begin(), bytes[0].end(), '\n');
  v.require(!bytes[0].empty() && bytes[0] == bytes[1],
            "series.ndjson identical (" + std::to_string(lines) + " lines, " + std::to_string(bytes[0].size()) + " bytes)");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string cli = "degentaxis";
  std::string configs = "configs";
  std::string scratch = (fs::temp_directory_path() / "degentaxis-acceptance").string();
  std::vector<int> selected;
  app.add_option("--cli", cli, "command-line tool used by criterion 9");
  app.add_option("--configs", configs, "directory holding determinism.ini");
  app.add_option("--scratch", scratch, "directory for run output");
  app.add_option("criteria", selected, "criteria to run (default: all)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  std::set<int> want(selected.begin(), selected.end());
  if (want.empty()) want = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  const std::map<int, double> limit = {{1, kLogisticSeconds},     {2, kHeatSeconds},       {3, kBudgetSeconds},
                                       {4, kBoundednessSeconds},  {5, kBoundednessSeconds}, {6, kSweepSeconds},
                                       {7, kDualSeconds},         {8, kInequalitySeconds},  {9, kDeterminismSeconds}};
  bool all_pass = true;
  auto report = [&](int id, Verdict v, double seconds) {
    v.require(seconds <= limit.at(id), "runtime " + num(seconds) + " s (limit " + num(limit.at(id)) + " s)");
    all_pass = all_pass && v.pass;
    std::printf("criterion %d: %s", id, v.pass ? "PASS" : "FAIL");
    for (std::size_t k = 0; k < v.notes.size(); ++k) std::printf("%s%s", k ? "; " : " (", v.notes[k].c_str());
    std::printf("%s\n", v.notes.empty() ? "" : ")");
    std::fflush(stdout);
  };
  auto timed = [&](int id, const std::function<Verdict()>& check) {
    if (!want.count(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    report(id, v, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };

  timed(1, homogeneous_logistic);
  timed(2, heat_mode);
  timed(3, budgets);
  if (want.count(4) || want.count(5)) {
    const auto t0 = std::chrono::steady_clock::now();
    std::pair<Verdict, Verdict> both;
    try {
      both = boundedness_and_stabilization();
    } catch (const std::exception& e) {
      both.first.require(false, std::string("exception: ") + e.what());
      both.second.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (want.count(4)) report(4, both.first, seconds);
    if (want.count(5)) report(5, both.second, seconds);
  }
  timed(6, small_nutrient);
  timed(7, dual_norm_checks);
  timed(8, inequality_harness);
  timed(9, [&] { return determinism(cli, configs, scratch); });
  return all_pass ? 0 : 1;
}
