#include "degentaxis/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "degentaxis/error.hpp"
#include "degentaxis/parallel.hpp"

namespace degentaxis {
namespace {

/// Cellwise products are formed first and summed afterwards in cell order.
template <typename Fn>
double integrate_cells(const Grid& g, Fn&& fn) {
  std::vector<double> terms(g.size());
  parallel_for(g.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) terms[i] = fn(i);
  });
  CompensatedSum s;
  for (double x : terms) s.add(x);
  return s.value() * g.cell_volume();
}

double gradv_weighted(const State& s, const Field& gv2, double q) {
  return integrate_cells(s.v.grid, [&](std::size_t i) {
    if (gv2[i] == 0.0) return 0.0;
    if (!(s.v[i] > 0.0)) throw UndefinedFunctional("|grad v|^q / v^{q-1} needs v > 0");
    return std::pow(gv2[i], 0.5 * q) / std::pow(s.v[i], q - 1.0);
  });
}

double gradv4_over_v3(const State& s, const Field& gv2, bool weight_u) {
  return integrate_cells(s.v.grid, [&](std::size_t i) {
    if (gv2[i] == 0.0) return 0.0;
    if (!(s.v[i] > 0.0)) throw UndefinedFunctional("|grad v|^4 / v^3 needs v > 0");
    const double base = gv2[i] * gv2[i] / (s.v[i] * s.v[i] * s.v[i]);
    return weight_u ? s.u[i] * base : base;
  });
}

double entropy(const Field& u) {
  return integrate_cells(u.grid, [&](std::size_t i) { return u[i] > 0.0 ? u[i] * std::log(u[i]) : 0.0; });
}

Dissipations dissipations_from(const State& s, const Field& gu2, const Field& gv2,
                               const std::vector<double>& k_list) {
  const Grid& g = s.u.grid;
  Dissipations d;
  for (double k : k_list) {
    const double value = integrate_cells(g, [&](std::size_t i) {
      if (gu2[i] == 0.0) return 0.0;
      if (s.u[i] == 0.0 && k < 0.0) return 0.0;
      return std::pow(s.u[i], k) * s.v[i] * gu2[i];
    });
    d.uk_v_gradu2.emplace_back(k, value);
  }
  d.u_over_v_gradv2 = integrate_cells(g, [&](std::size_t i) {
    if (gv2[i] == 0.0) return 0.0;
    if (!(s.v[i] > 0.0)) throw UndefinedFunctional("(u/v)|grad v|^2 needs v > 0");
    return s.u[i] / s.v[i] * gv2[i];
  });
  d.v_over_u_gradu2 = integrate_cells(g, [&](std::size_t i) {
    if (gu2[i] == 0.0 || s.u[i] == 0.0) return 0.0;
    return s.v[i] / s.u[i] * gu2[i];
  });
  d.gradv4_over_v3 = gradv4_over_v3(s, gv2, false);
  d.u_gradv4_over_v3 = gradv4_over_v3(s, gv2, true);
  // Zero cells drop out of (v/u)|grad u|^2 and of every negative power of u.
  std::size_t zeros = 0;
  for (double x : s.u.values) zeros += x == 0.0 ? 1 : 0;
  d.excluded_volume_fraction = static_cast<double>(zeros) / static_cast<double>(g.size());
  return d;
}

}  // namespace

DiagnosticsConfig default_diagnostics(double alpha) {
  DiagnosticsConfig c;
  c.p_list = {2.0};
  if (in_theory_window(alpha)) c.p_list.push_back(regime_exponents(alpha).p0);
  c.p_list.push_back(4.0);
  c.q_list = {2.0, 4.0};
  c.k_list = {1.0 - alpha, 0.5 * (1.0 - alpha), 0.0};
  return c;
}

void DissipationBudgets::add_scaled(const DissipationBudgets& rate, double dt) {
  u1ma_v_gradu2 += dt * rate.u1ma_v_gradu2;
  u_over_v_gradv2 += dt * rate.u_over_v_gradv2;
  v_over_u_gradu2 += dt * rate.v_over_u_gradu2;
  gradv4_over_v3 += dt * rate.gradv4_over_v3;
  v_gradu2 += dt * rate.v_gradu2;
}

std::vector<std::pair<const char*, double>> DissipationBudgets::entries() const {
  return {{"u1ma_v_gradu2", u1ma_v_gradu2},
          {"u_over_v_gradv2", u_over_v_gradv2},
          {"v_over_u_gradu2", v_over_u_gradu2},
          {"gradv4_over_v3", gradv4_over_v3},
          {"v_gradu2", v_gradu2}};
}

DissipationBudgets budget_rates(const State& s, double alpha) {
  const Field gu2 = cell_gradient_squared(s.u);
  const Field gv2 = cell_gradient_squared(s.v);
  const Dissipations d = dissipations_from(s, gu2, gv2, {1.0 - alpha, 0.0});
  DissipationBudgets r;
  r.u1ma_v_gradu2 = d.uk_v_gradu2[0].second;
  r.v_gradu2 = d.uk_v_gradu2[1].second;
  r.u_over_v_gradv2 = d.u_over_v_gradv2;
  r.v_over_u_gradu2 = d.v_over_u_gradu2;
  r.gradv4_over_v3 = d.gradv4_over_v3;
  return r;
}

DiagnosticsRecord basic_moments(const State& s) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.mass_u = integrate(s.u);
  r.mass_v = integrate(s.v);
  r.coupling = integrate_product(s.u, s.v);
  r.max_u = *std::max_element(s.u.values.begin(), s.u.values.end());
  r.max_v = *std::max_element(s.v.values.begin(), s.v.values.end());
  r.min_v = *std::min_element(s.v.values.begin(), s.v.values.end());
  r.grad_v_l2 = integrate(cell_gradient_squared(s.v));
  return r;
}

double gradv_functional(const State& s, double q) {
  if (!(q >= 2.0)) throw InvalidArgument("gradv_functional needs q >= 2");
  for (double x : s.v.values) {
    if (!(x > 0.0)) throw InvalidArgument("gradv_functional needs v > 0");
  }
  return gradv_weighted(s, cell_gradient_squared(s.v), q);
}

double quasi_energy_F(const State& s, double a) {
  for (double x : s.u.values) {
    if (!(x > 0.0)) throw UndefinedFunctional("F needs u > 0 (ln u)");
  }
  const double log_term = integrate_cells(s.u.grid, [&](std::size_t i) { return std::log(s.u[i]); });
  return a * gradv_weighted(s, cell_gradient_squared(s.v), 2.0) - log_term;
}

double quasi_energy_G(const State& s, double a) {
  return entropy(s.u) + a * gradv4_over_v3(s, cell_gradient_squared(s.v), false);
}

double lp_integral(const Field& u, double p) {
  return integrate_cells(u.grid, [&](std::size_t i) { return std::pow(u[i], p); });
}

double quasi_energy_H(const State& s, double p, double q) {
  if (!(p > 1.0)) throw InvalidArgument("H needs p > 1");
  if (!(q >= 2.0)) throw InvalidArgument("H needs q >= 2");
  return gradv_weighted(s, cell_gradient_squared(s.v), q) + lp_integral(s.u, p);
}

Dissipations dissipations(const State& s, const std::vector<double>& k_list) {
  return dissipations_from(s, cell_gradient_squared(s.u), cell_gradient_squared(s.v), k_list);
}

DiagnosticsRecord compute_record(const State& s, const DiagnosticsConfig& cfg) {
  const Field gu2 = cell_gradient_squared(s.u);
  const Field gv2 = cell_gradient_squared(s.v);

  DiagnosticsRecord r = basic_moments(s);
  for (double p : cfg.p_list) r.lp_norms.emplace_back(p, lp_integral(s.u, p));
  for (double q : cfg.q_list) r.gradv_q.emplace_back(q, gradv_weighted(s, gv2, q));
  try {
    r.F = quasi_energy_F(s, cfg.a_F);
  } catch (const UndefinedFunctional&) {
    r.F.reset();
  }
  r.G = entropy(s.u) + cfg.a_G * gradv4_over_v3(s, gv2, false);
  r.H = gradv_weighted(s, gv2, cfg.H_q) + lp_integral(s.u, cfg.H_p);
  r.dissipations = dissipations_from(s, gu2, gv2, cfg.k_list);
  return r;
}

namespace {

nlohmann::ordered_json pairs_to_json(const std::vector<std::pair<double, double>>& pairs) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [k, v] : pairs) arr.push_back({k, v});
  return arr;
}

std::vector<std::pair<double, double>> pairs_from_json(const nlohmann::json& j) {
  std::vector<std::pair<double, double>> out;
  for (const auto& e : j) out.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
  return out;
}

}  // namespace

nlohmann::ordered_json to_json(const DiagnosticsRecord& r) {
  nlohmann::ordered_json j;
  j["t"] = r.t;
  j["mass_u"] = r.mass_u;
  j["mass_v"] = r.mass_v;
  j["coupling"] = r.coupling;
  j["cumulative_consumption"] = r.cumulative_consumption;
  j["lp_norms"] = pairs_to_json(r.lp_norms);
  j["max_u"] = r.max_u;
  j["max_v"] = r.max_v;
  j["min_v"] = r.min_v;
  j["grad_v_l2"] = r.grad_v_l2;
  j["gradv_q"] = pairs_to_json(r.gradv_q);
  j["F"] = r.F ? nlohmann::ordered_json(*r.F) : nlohmann::ordered_json(nullptr);
  j["G"] = r.G;
  j["H"] = r.H;
  nlohmann::ordered_json d;
  d["uk_v_gradu2"] = pairs_to_json(r.dissipations.uk_v_gradu2);
  d["u_over_v_gradv2"] = r.dissipations.u_over_v_gradv2;
  d["v_over_u_gradu2"] = r.dissipations.v_over_u_gradu2;
  d["gradv4_over_v3"] = r.dissipations.gradv4_over_v3;
  d["u_gradv4_over_v3"] = r.dissipations.u_gradv4_over_v3;
  d["excluded_volume_fraction"] = r.dissipations.excluded_volume_fraction;
  j["dissipations"] = d;
  j["clip_budget"] = r.clip_budget;
  if (r.dual_dist_u0) j["dual_dist_u0"] = *r.dual_dist_u0;
  if (r.dual_step) j["dual_step"] = *r.dual_step;
  if (r.dissipation_budgets) {
    nlohmann::ordered_json b;
    for (const auto& [name, value] : r.dissipation_budgets->entries()) b[name] = value;
    j["dissipation_budgets"] = b;
  }
  return j;
}

DiagnosticsRecord record_from_json(const nlohmann::json& j) {
  DiagnosticsRecord r;
  r.t = j.at("t").get<double>();
  r.mass_u = j.at("mass_u").get<double>();
  r.mass_v = j.at("mass_v").get<double>();
  r.coupling = j.at("coupling").get<double>();
  r.cumulative_consumption = j.at("cumulative_consumption").get<double>();
  r.lp_norms = pairs_from_json(j.at("lp_norms"));
  r.max_u = j.at("max_u").get<double>();
  r.max_v = j.at("max_v").get<double>();
  r.min_v = j.at("min_v").get<double>();
  r.grad_v_l2 = j.at("grad_v_l2").get<double>();
  r.gradv_q = pairs_from_json(j.at("gradv_q"));
  if (!j.at("F").is_null()) r.F = j.at("F").get<double>();
  r.G = j.at("G").get<double>();
  r.H = j.at("H").get<double>();
  const auto& d = j.at("dissipations");
  r.dissipations.uk_v_gradu2 = pairs_from_json(d.at("uk_v_gradu2"));
  r.dissipations.u_over_v_gradv2 = d.at("u_over_v_gradv2").get<double>();
  r.dissipations.v_over_u_gradu2 = d.at("v_over_u_gradu2").get<double>();
  r.dissipations.gradv4_over_v3 = d.at("gradv4_over_v3").get<double>();
  r.dissipations.u_gradv4_over_v3 = d.at("u_gradv4_over_v3").get<double>();
  r.dissipations.excluded_volume_fraction = d.at("excluded_volume_fraction").get<double>();
  r.clip_budget = j.at("clip_budget").get<double>();
  if (j.contains("dual_dist_u0")) r.dual_dist_u0 = j.at("dual_dist_u0").get<double>();
  if (j.contains("dual_step")) r.dual_step = j.at("dual_step").get<double>();
  if (j.contains("dissipation_budgets")) {
    const auto& b = j.at("dissipation_budgets");
    DissipationBudgets db;
    db.u1ma_v_gradu2 = b.at("u1ma_v_gradu2").get<double>();
    db.u_over_v_gradv2 = b.at("u_over_v_gradv2").get<double>();
    db.v_over_u_gradu2 = b.at("v_over_u_gradu2").get<double>();
    db.gradv4_over_v3 = b.at("gradv4_over_v3").get<double>();
    db.v_gradu2 = b.at("v_gradu2").get<double>();
    r.dissipation_budgets = db;
  }
  return r;
}

}  // namespace degentaxis
