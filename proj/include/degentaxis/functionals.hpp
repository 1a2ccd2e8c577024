#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "degentaxis/model.hpp"

namespace degentaxis {

/// Which members of the estimate ladder to evaluate.
struct DiagnosticsConfig {
  std::vector<double> p_list;  ///< exponents p of int u^p
  std::vector<double> q_list;  ///< exponents q of int |grad v|^q / v^{q-1}
  std::vector<double> k_list;  ///< exponents k of int u^k v |grad u|^2
  double a_F = 1.0;            ///< weight of int |grad v|^2 / v in F
  double a_G = 1.0;            ///< weight of int |grad v|^4 / v^3 in G
  double H_p = 2.0;
  double H_q = 4.0;
  /// Record the dual distance to u0 and between consecutive samples.
  bool dual_norm = false;
};

/// p-list {2, p0, 4}, q-list {2, 4}, k-list {1 - alpha, (1 - alpha)/2, 0};
/// p0 is dropped when alpha lies outside the theory window (3/2, 19/12).
DiagnosticsConfig default_diagnostics(double alpha);

/// Time integrals of the dissipation rates controlled by the energy ladder.
struct DissipationBudgets {
  double u1ma_v_gradu2 = 0.0;    ///< int u^{1-alpha} v |grad u|^2
  double u_over_v_gradv2 = 0.0;  ///< int (u/v) |grad v|^2
  double v_over_u_gradu2 = 0.0;  ///< int (v/u) |grad u|^2
  double gradv4_over_v3 = 0.0;   ///< int |grad v|^4 / v^3
  double v_gradu2 = 0.0;         ///< int v |grad u|^2

  void add_scaled(const DissipationBudgets& rate, double dt);
  std::vector<std::pair<const char*, double>> entries() const;
};

/// Instantaneous values of the budgeted rates (cells with u = 0 are left
/// out of the terms with negative powers of u).
DissipationBudgets budget_rates(const State& s, double alpha);

struct Dissipations {
  std::vector<std::pair<double, double>> uk_v_gradu2;  ///< (k, int u^k v |grad u|^2)
  double u_over_v_gradv2 = 0.0;
  double v_over_u_gradu2 = 0.0;
  double gradv4_over_v3 = 0.0;
  double u_gradv4_over_v3 = 0.0;
  /// Volume fraction of cells dropped because u = 0 meets a negative power.
  double excluded_volume_fraction = 0.0;
};

/// One time-stamped row of every tracked functional and budget.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass_u = 0.0;
  double mass_v = 0.0;
  double coupling = 0.0;
  double cumulative_consumption = 0.0;
  std::vector<std::pair<double, double>> lp_norms;
  double max_u = 0.0;
  double max_v = 0.0;
  double min_v = 0.0;
  double grad_v_l2 = 0.0;
  std::vector<std::pair<double, double>> gradv_q;
  std::optional<double> F;
  double G = 0.0;
  double H = 0.0;
  Dissipations dissipations;
  double clip_budget = 0.0;
  std::optional<double> dual_dist_u0;
  /// || u(t) - u(t_prev) ||_* against the previous sample.
  std::optional<double> dual_step;
  std::optional<DissipationBudgets> dissipation_budgets;
};

/// mass_u, mass_v, coupling, max_u, max_v, min_v and grad_v_l2.
DiagnosticsRecord basic_moments(const State& s);

/// int |grad v|^q / v^{q-1}; throws InvalidArgument for q < 2 or v <= 0.
double gradv_functional(const State& s, double q);

/// a int |grad v|^2 / v - int ln u; throws UndefinedFunctional when some u = 0.
double quasi_energy_F(const State& s, double a);

/// int u ln u + a int |grad v|^4 / v^3 with 0 ln 0 = 0.
double quasi_energy_G(const State& s, double a);

/// int |grad v|^q / v^{q-1} + int u^p; needs p > 1 and q >= 2.
double quasi_energy_H(const State& s, double p, double q);

/// int u^p.
double lp_integral(const Field& u, double p);

Dissipations dissipations(const State& s, const std::vector<double>& k_list);

/// Everything except the stepper-owned entries (cumulative consumption,
/// clip budget, dual distances, budgets), which the caller fills in.
DiagnosticsRecord compute_record(const State& s, const DiagnosticsConfig& cfg);

nlohmann::ordered_json to_json(const DiagnosticsRecord& r);
DiagnosticsRecord record_from_json(const nlohmann::json& j);

}  // namespace degentaxis
