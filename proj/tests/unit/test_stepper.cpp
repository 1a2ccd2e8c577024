#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "degentaxis/error.hpp"
#include "degentaxis/stepper.hpp"
#include "helpers.hpp"

using namespace degentaxis;
using testing::grid1;
using testing::grid2;

namespace {

// v(t) = 2 e^{-2t} / (1 + e^{-2t}) solves v' = -(2 - v) v with v(0) = 1.
double logistic_v(double t) { return 2.0 * std::exp(-2.0 * t) / (1.0 + std::exp(-2.0 * t)); }

}  // namespace

TEST_SUITE("stepper") {
  TEST_CASE("stable_dt") {
    Params p;
    p.dt_max = 1.0;
    CHECK(stable_dt(State{Field(grid1(10), 0.0), Field(grid1(10), 1.0), 0.0}, p) == 1.0);
    const double dt = stable_dt(State{Field(grid1(10), 1.0), Field(grid1(10), 1.0), 0.0}, p);
    CHECK(dt == doctest::Approx(0.0025).epsilon(1e-14));
    const double coarse = stable_dt(State{Field(grid1(5), 1.0), Field(grid1(5), 1.0), 0.0}, p);
    CHECK(coarse == doctest::Approx(4.0 * dt).epsilon(1e-14));
    p.dt_max = 1e-3;
    CHECK(stable_dt(State{Field(grid1(10), 1.0), Field(grid1(10), 1.0), 0.0}, p) == 1e-3);
  }

  TEST_CASE("nutrient solve") {
    const Grid g = grid2(6, 5);
    const VImplicitSystem sys = v_implicit_operator(State{Field(g, 1.0), Field(g, 1.0), 0.0}, 0.1);
    std::vector<double> x(g.size(), 0.0);
    const SolveReport r = solve_v_system(sys, x, 1e-12, 500);
    CHECK(r.residual <= 1e-12);
    for (double v : x) CHECK(v == doctest::Approx(1.0 / 1.1).epsilon(1e-11));

    // 1D uses the direct solve.
    const Grid g1 = grid1(9);
    const State s{testing::random_field(g1, 3, 0.0, 2.0), testing::random_field(g1, 4, 0.1, 1.0), 0.0};
    const VImplicitSystem sys1 = v_implicit_operator(s, 0.05);
    std::vector<double> y(g1.size(), 0.0), Ay(g1.size());
    solve_v_system(sys1, y, 1e-12, 10);
    sys1.apply(y, Ay);
    for (std::size_t i = 0; i < g1.size(); ++i) CHECK(Ay[i] == doctest::Approx(s.v[i]).epsilon(1e-13));
  }

  TEST_CASE("constant state step") {
    Params p;
    const Grid g = grid2(4, 4);
    const auto [s, rep] = step(State{Field(g, 1.0), Field(g, 1.0), 0.0}, p, 0.01);
    // v first: v_new = 1 / 1.01; then u gains dt * u_old * v_new.
    for (double v : s.v.values) CHECK(v == doctest::Approx(1.0 / 1.01).epsilon(1e-13));
    for (double u : s.u.values) CHECK(u == doctest::Approx(1.0 + 0.01 / 1.01).epsilon(1e-13));
    CHECK(s.t == doctest::Approx(0.01));
    CHECK(rep.mass_clipped == 0.0);
  }

  TEST_CASE("vanishing nutrient freezes u") {
    Params p;
    const Grid g = grid2(5, 4);
    const Field u = testing::random_field(g, 2, 0.0, 3.0);
    const auto [s, rep] = step(State{u, Field(g, 0.0), 0.0}, p, 0.01);
    CHECK(s.u.values == u.values);
  }

  TEST_CASE("budgets close on every step") {
    Params p;
    p.chi = 1.5;
    p.ell = 0.8;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const Grid g = grid2(12, 10);
      State s{testing::random_field(g, seed, 0.0, 2.0), testing::random_field(g, seed + 10, 0.05, 1.5), 0.0};
      const double v0 = integrate(s.v);
      double consumed = 0.0;
      for (int k = 0; k < 200; ++k) {
        const double dt = stable_dt(s, p);
        const double mu = integrate(s.u), mv = integrate(s.v);
        const double vmax = *std::max_element(s.v.values.begin(), s.v.values.end());
        auto [next, rep] = step(s, p, dt);
        const double mu1 = integrate(next.u), mv1 = integrate(next.v);
        CHECK(std::abs(mu1 - mu - p.ell * rep.consumption - rep.mass_clipped) <= 1e-12 * mu1);
        CHECK(std::abs(mv1 - mv + rep.consumption) <= 1e-12 * v0);
        CHECK(mv1 <= mv);
        CHECK(rep.max_v <= vmax);
        CHECK(rep.min_v > 0.0);
        consumed += rep.consumption;
        s = std::move(next);
      }
      CHECK(consumed <= v0 + 1e-10);
    }
  }

  TEST_CASE("reject policy") {
    Params p;
    p.clip_policy = ClipPolicy::Reject;
    p.chi = 50.0;
    const Grid g = grid1(8);
    Field u(g, 0.0);
    u[3] = 1.0;
    Field v(g, 1.0);
    v[4] = 3.0;
    CHECK_THROWS_AS(step(State{u, v, 0.0}, p, 0.05), PositivityError);
  }

  TEST_CASE("homogeneous data follow the logistic pair") {
    Params p;
    p.dt_max = 2e-5;
    RunOptions o;
    o.horizon = 1.0;
    o.sample_cadence = 0.25;
    const Grid g = grid1(4);
    const RunResult r = run(State{Field(g, 1.0), Field(g, 1.0), 0.0}, p, o);
    const double v = logistic_v(1.0);
    CHECK(v == doctest::Approx(0.23840584404423509).epsilon(1e-15));
    CHECK(r.reason == Termination::Horizon);
    CHECK(r.final_state.t == 1.0);
    CHECK(std::abs(r.series.back().mass_v - v) <= 1e-4 * v);
    CHECK(std::abs(r.series.back().mass_u - (2.0 - v)) <= 1e-4 * (2.0 - v));
    CHECK(r.series.size() == 5);
    // u + v stays 2.
    for (const auto& rec : r.series) CHECK(std::abs(rec.mass_u + rec.mass_v - 2.0) <= 1e-11);
  }

  TEST_CASE("heat mode with u = 0") {
    Params p;
    p.dt_max = 1e-5;
    RunOptions o;
    o.horizon = 0.1;
    o.sample_cadence = 0.0;
    const Grid g = grid1(128);
    const Field v0 = sample_field(g, [](double x, double, double) { return 1.0 + 0.5 * std::cos(std::numbers::pi * x); });
    const RunResult r = run(State{Field(g, 0.0), v0, 0.0}, p, o);
    const double amp = 0.5 * std::exp(-std::numbers::pi * std::numbers::pi * 0.1);
    CHECK(amp == doctest::Approx(0.18635391942671897).epsilon(1e-15));
    double err = 0.0;
    for (int i = 0; i < 128; ++i) {
      const double x = g.center(0, i);
      err = std::max(err, std::abs(r.final_state.v[i] - (1.0 + amp * std::cos(std::numbers::pi * x))));
    }
    CHECK(err <= 1e-3);
  }

  TEST_CASE("run edge cases") {
    Params p;
    const Grid g = grid1(4);
    const State s{Field(g, 1.0), Field(g, 1.0), 0.0};
    RunOptions o;
    o.horizon = 0.0;
    const RunResult r = run(s, p, o);
    CHECK(r.series.empty());
    CHECK(r.final_state.u.values == s.u.values);

    Params bad;
    bad.alpha = 2.0;
    RunOptions c;
    c.certify = true;
    const RunResult refused = run(s, bad, c);
    CHECK(refused.reason == Termination::RegimeViolation);
    CHECK(refused.message.find("(3/2, 19/12)") != std::string::npos);
  }

  TEST_CASE("detect_steady") {
    DiagnosticsRecord a, b;
    a.t = 0.0;
    b.t = 1.0;
    b.dual_step = 0.0;
    const std::vector<DiagnosticsRecord> frozen{a, b};
    CHECK(detect_steady(frozen, 0.0, {}));

    Params p;
    RunOptions o;
    o.horizon = 0.5;
    o.sample_cadence = 0.25;
    o.diagnostics.dual_norm = true;
    const Grid g = grid1(8);
    const RunResult r = run(State{testing::random_field(g, 1, 0.5, 1.0), Field(g, 50.0), 0.0}, p, o);
    const std::span<const DiagnosticsRecord> first(r.series.data(), 2);
    CHECK_FALSE(detect_steady(first, r.series.front().mass_v, {}));
    CHECK_THROWS_AS(detect_steady(std::span<const DiagnosticsRecord>(r.series.data(), 1), 1.0, {}),
                    InvalidArgument);
  }

  TEST_CASE("logistic run turns steady") {
    // int v <= 1e-6 int v0 from t = 7.254, and u' = (2 - v) v < 1e-8 from t = 9.903.
    Params p;
    p.dt_max = 1e-3;
    RunOptions o;
    o.horizon = 30.0;
    o.sample_cadence = 0.5;
    o.stop_at_steady = true;
    const Grid g = grid1(4);
    const RunResult r = run(State{Field(g, 1.0), Field(g, 1.0), 0.0}, p, o);
    CHECK(r.reason == Termination::Steady);
    CHECK(r.final_state.t >= 9.9);
    CHECK(r.final_state.t <= 15.0);
  }

  TEST_CASE("F is nonincreasing along the logistic run") {
    Params p;
    p.dt_max = 1e-3;
    const Grid g = grid2(3, 3);
    State s{Field(g, 1.0), Field(g, 1.0), 0.0};
    double F = quasi_energy_F(s, 1.0);
    for (int k = 0; k < 500; ++k) {
      s = step(s, p, 1e-3).first;
      const double next = quasi_energy_F(s, 1.0);
      CHECK(next <= F);
      F = next;
    }
  }
}
