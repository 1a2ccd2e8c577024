#include "degentaxis/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace degentaxis {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s) {
  double x = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x)) throw std::invalid_argument("expected a number, got '" + s + "'");
  return x;
}

long long parse_int(const std::string& s) {
  long long x = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, x);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("expected an integer, got '" + s + "'");
  return x;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t x = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, x);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("expected an unsigned integer, got '" + s + "'");
  return x;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_double(item));
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split(s, ',')) out.push_back(static_cast<int>(parse_int(item)));
  return out;
}

std::pair<InequalityKind, InequalityExponents> parse_case(const std::string& s) {
  std::istringstream in(s);
  std::string name;
  in >> name;
  std::pair<InequalityKind, InequalityExponents> out;
  try {
    out.first = inequality_from_string(name);
  } catch (const InvalidArgument& e) {
    throw std::invalid_argument(e.what());
  }
  auto& e = out.second;
  const std::map<std::string, double*> slots = {
      {"p_star", &e.p_star}, {"p", &e.p},   {"q", &e.q},     {"r", &e.r},         {"k", &e.k},
      {"beta", &e.beta},     {"p0", &e.p0}, {"eta", &e.eta}, {"bound", &e.bound}, {"M", &e.bound},
      {"L", &e.bound}};
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected name=value, got '" + tok + "'");
    const auto it = slots.find(tok.substr(0, eq));
    if (it == slots.end()) throw std::invalid_argument("unknown exponent '" + tok.substr(0, eq) + "'");
    *it->second = parse_double(tok.substr(eq + 1));
  }
  return out;
}

using Handler = std::function<void(const std::string&)>;

struct Parser {
  RunConfig cfg;
  int dim = 1;
  std::vector<int> cells{64};
  std::vector<double> extents{1.0};
  bool p_list_set = false;
  bool q_list_set = false;
  bool k_list_set = false;
  std::map<std::string, int> lines;  // "section.key" -> line
  std::vector<std::string> errors;
  std::map<std::string, std::map<std::string, Handler>> table;

  Parser() {
    auto& g = table["grid"];
    g["dim"] = [this](const std::string& v) { dim = static_cast<int>(parse_int(v)); };
    g["cells"] = [this](const std::string& v) { cells = parse_int_list(v); };
    g["extents"] = [this](const std::string& v) { extents = parse_list(v); };

    auto& p = table["params"];
    Params& pr = cfg.params;
    p["chi"] = [&pr](const std::string& v) { pr.chi = parse_double(v); };
    p["ell"] = [&pr](const std::string& v) { pr.ell = parse_double(v); };
    p["alpha"] = [&pr](const std::string& v) { pr.alpha = parse_double(v); };
    p["eps"] = [&pr](const std::string& v) { pr.eps = parse_double(v); };
    p["safety"] = [&pr](const std::string& v) { pr.safety = parse_double(v); };
    p["dt_max"] = [&pr](const std::string& v) { pr.dt_max = parse_double(v); };
    p["solver_tol"] = [&pr](const std::string& v) { pr.solver_tol = parse_double(v); };
    p["solver_max_iter"] = [&pr](const std::string& v) { pr.solver_max_iter = static_cast<int>(parse_int(v)); };
    p["clip_policy"] = [&pr](const std::string& v) {
      if (v == "reject") {
        pr.clip_policy = ClipPolicy::Reject;
      } else if (v == "clip-and-account") {
        pr.clip_policy = ClipPolicy::ClipAndAccount;
      } else {
        throw std::invalid_argument("expected reject or clip-and-account, got '" + v + "'");
      }
    };
    p["mobility"] = [&pr](const std::string& v) {
      if (v == "arithmetic") {
        pr.mobility = MobilityAveraging::Arithmetic;
      } else if (v == "harmonic") {
        pr.mobility = MobilityAveraging::Harmonic;
      } else {
        throw std::invalid_argument("expected arithmetic or harmonic, got '" + v + "'");
      }
    };

    auto& ini = table["initial"];
    InitialDataSpec& spec = cfg.initial;
    for (auto [prefix, recipe] : {std::pair{std::string("u0"), &spec.u0}, std::pair{std::string("v0"), &spec.v0}}) {
      ini[prefix] = [recipe](const std::string& v) {
        try {
          recipe->kind = recipe_from_string(v);
        } catch (const InvalidArgument& e) {
          throw std::invalid_argument(e.what());
        }
      };
      ini[prefix + "_level"] = [recipe](const std::string& v) { recipe->level = parse_double(v); };
      ini[prefix + "_floor"] = [recipe](const std::string& v) { recipe->floor = parse_double(v); };
      ini[prefix + "_width"] = [recipe](const std::string& v) { recipe->width = parse_double(v); };
      ini[prefix + "_modes"] = [recipe](const std::string& v) { recipe->modes = static_cast<int>(parse_int(v)); };
    }
    ini["v0_scale"] = [&spec](const std::string& v) { spec.v0_scale = parse_double(v); };
    ini["seed"] = [&spec](const std::string& v) { spec.seed = parse_u64(v); };

    auto& r = table["run"];
    r["horizon"] = [this](const std::string& v) { cfg.horizon = parse_double(v); };
    r["sample_cadence"] = [this](const std::string& v) { cfg.sample_cadence = parse_double(v); };
    r["snapshot_cadence"] = [this](const std::string& v) { cfg.snapshot_cadence = parse_double(v); };
    r["stop_at_steady"] = [this](const std::string& v) { cfg.stop_at_steady = parse_bool(v); };
    r["tol_v"] = [this](const std::string& v) { cfg.steady.tol_v = parse_double(v); };
    r["tol_u"] = [this](const std::string& v) { cfg.steady.tol_u = parse_double(v); };
    r["certify"] = [this](const std::string& v) { cfg.certify = parse_bool(v); };
    r["track_budgets"] = [this](const std::string& v) { cfg.track_budgets = parse_bool(v); };
    r["nonconstancy_fraction"] = [this](const std::string& v) { cfg.nonconstancy_fraction = parse_double(v); };

    auto& d = table["diagnostics"];
    DiagnosticsConfig& dc = cfg.diagnostics;
    d["p_list"] = [this, &dc](const std::string& v) {
      dc.p_list = parse_list(v);
      p_list_set = true;
    };
    d["q_list"] = [this, &dc](const std::string& v) {
      dc.q_list = parse_list(v);
      q_list_set = true;
    };
    d["k_list"] = [this, &dc](const std::string& v) {
      dc.k_list = parse_list(v);
      k_list_set = true;
    };
    d["a_F"] = [&dc](const std::string& v) { dc.a_F = parse_double(v); };
    d["a_G"] = [&dc](const std::string& v) { dc.a_G = parse_double(v); };
    d["H_p"] = [&dc](const std::string& v) { dc.H_p = parse_double(v); };
    d["H_q"] = [&dc](const std::string& v) { dc.H_q = parse_double(v); };
    d["dual_norm"] = [&dc](const std::string& v) { dc.dual_norm = parse_bool(v); };

    auto& o = table["output"];
    o["directory"] = [this](const std::string& v) { cfg.output.directory = v; };
    o["formats"] = [this](const std::string& v) {
      cfg.output.ndjson = cfg.output.snapshot = cfg.output.csv = false;
      for (const auto& f : split(v, ',')) {
        if (f == "ndjson") {
          cfg.output.ndjson = true;
        } else if (f == "snapshot") {
          cfg.output.snapshot = true;
        } else if (f == "csv") {
          cfg.output.csv = true;
        } else {
          throw std::invalid_argument("unknown format '" + f + "' (expected ndjson, snapshot, csv)");
        }
      }
    };

    table["sweep"]["scales"] = [this](const std::string& v) { cfg.sweep_scales = parse_list(v); };

    auto& q = table["inequalities"];
    InequalityConfig& ic = cfg.inequalities;
    q["case"] = [&ic](const std::string& v) { ic.cases.push_back(parse_case(v)); };
    q["samples"] = [&ic](const std::string& v) { ic.samples = static_cast<int>(parse_int(v)); };
    q["seed"] = [&ic](const std::string& v) { ic.seed = parse_u64(v); };
    q["c_cap"] = [&ic](const std::string& v) { ic.c_cap = parse_double(v); };
    q["refinement"] = [&ic](const std::string& v) { ic.refinement = parse_int_list(v); };
    q["max_modes"] = [&ic](const std::string& v) { ic.sampler.max_modes = static_cast<int>(parse_int(v)); };
    q["phi_min"] = [&ic](const std::string& v) { ic.sampler.phi_min = parse_double(v); };
    q["psi_min"] = [&ic](const std::string& v) { ic.sampler.psi_min = parse_double(v); };
    q["spike_fraction"] = [&ic](const std::string& v) { ic.sampler.spike_fraction = parse_double(v); };
  }

  void parse(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const auto hash = raw.find('#');
      const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty()) continue;
      auto fail = [&](const std::string& msg) { errors.push_back("line " + std::to_string(line_no) + ": " + msg); };
      if (line.front() == '[') {
        if (line.back() != ']') {
          fail("unterminated section header '" + line + "'");
          continue;
        }
        section = trim(line.substr(1, line.size() - 2));
        if (!table.count(section)) fail("unknown section [" + section + "]");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        fail("expected key = value, got '" + line + "'");
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (section.empty()) {
        fail("key '" + key + "' outside of any section");
        continue;
      }
      const auto sec = table.find(section);
      if (sec == table.end()) continue;  // already reported
      const auto h = sec->second.find(key);
      if (h == sec->second.end()) {
        fail("unknown key '" + key + "' in [" + section + "]");
        continue;
      }
      if (value.empty()) {
        fail("[" + section + "] " + key + ": missing value");
        continue;
      }
      lines[section + "." + key] = line_no;
      try {
        h->second(value);
      } catch (const std::exception& e) {
        fail("[" + section + "] " + key + ": " + e.what());
      }
    }
  }

  void finish() {
    try {
      cfg.grid = make_grid(dim, cells, extents);
    } catch (const std::exception& e) {
      errors.push_back(where("grid.cells") + e.what());
    }
    // The default lists follow alpha, so they are filled in only now.
    const auto defaults = default_diagnostics(cfg.params.alpha);
    if (!p_list_set) cfg.diagnostics.p_list = defaults.p_list;
    if (!q_list_set) cfg.diagnostics.q_list = defaults.q_list;
    if (!k_list_set) cfg.diagnostics.k_list = defaults.k_list;
    check_ranges();
  }

  std::string where(const std::string& key) const {
    const auto it = lines.find(key);
    return it == lines.end() ? "config: " : "line " + std::to_string(it->second) + ": ";
  }

  void check_ranges() {
    auto need = [&](bool ok, const std::string& key, const std::string& msg) {
      if (!ok) errors.push_back(where(key) + msg);
    };
    const Params& p = cfg.params;
    need(p.chi > 0.0, "params.chi", "chi must be > 0");
    need(p.ell > 0.0, "params.ell", "ell must be > 0");
    need(p.alpha > 0.0, "params.alpha", "alpha must be > 0");
    need(p.eps >= 0.0 && p.eps < 1.0, "params.eps", "eps must lie in [0, 1)");
    need(p.safety > 0.0 && p.safety <= 1.0, "params.safety", "safety must lie in (0, 1]");
    need(p.dt_max > 0.0, "params.dt_max", "dt_max must be > 0");
    need(p.solver_tol > 0.0, "params.solver_tol", "solver_tol must be > 0");
    need(p.solver_max_iter >= 1, "params.solver_max_iter", "solver_max_iter must be >= 1");
    need(!cfg.certify || p.theory_window(), "params.alpha",
         "alpha = " + std::to_string(p.alpha) + " lies outside (3/2, 19/12); certify refuses the run");

    const InitialDataSpec& s = cfg.initial;
    need(s.v0_scale > 0.0, "initial.v0_scale", "v0_scale must be > 0");
    for (auto [name, r] : {std::pair{"u0", &s.u0}, std::pair{"v0", &s.v0}}) {
      const std::string n(name);
      need(r->level >= 0.0, "initial." + n + "_level", n + "_level must be >= 0");
      need(r->floor >= 0.0, "initial." + n + "_floor", n + "_floor must be >= 0");
      need(r->width > 0.0, "initial." + n + "_width", n + "_width must be > 0");
      need(r->modes >= 0, "initial." + n + "_modes", n + "_modes must be >= 0");
    }
    need(s.u0.level + s.u0.floor > 0.0, "initial.u0", "u0 recipe is identically zero");
    need(s.v0.kind == RecipeKind::Constant || s.v0.floor > 0.0 || s.v0.kind == RecipeKind::CosineMix,
         "initial.v0_floor", "v0 needs v0_floor > 0 for this recipe (v0 must stay positive)");
    need(s.v0.level + s.v0.floor > 0.0, "initial.v0", "v0 recipe is identically zero");

    need(cfg.horizon >= 0.0, "run.horizon", "horizon must be >= 0");
    need(cfg.sample_cadence >= 0.0, "run.sample_cadence", "sample_cadence must be >= 0");
    need(cfg.snapshot_cadence >= 0.0, "run.snapshot_cadence", "snapshot_cadence must be >= 0");
    need(cfg.steady.tol_v > 0.0, "run.tol_v", "tol_v must be > 0");
    need(cfg.steady.tol_u > 0.0, "run.tol_u", "tol_u must be > 0");
    need(cfg.nonconstancy_fraction > 0.0 && cfg.nonconstancy_fraction <= 1.0, "run.nonconstancy_fraction",
         "nonconstancy_fraction must lie in (0, 1]");

    const DiagnosticsConfig& d = cfg.diagnostics;
    for (double q : d.q_list) need(q >= 2.0, "diagnostics.q_list", "q_list entries must be >= 2");
    need(d.H_p > 1.0, "diagnostics.H_p", "H_p must be > 1");
    need(d.H_q >= 2.0, "diagnostics.H_q", "H_q must be >= 2");

    for (double x : cfg.sweep_scales) need(x > 0.0, "sweep.scales", "scales must be > 0");

    const InequalityConfig& ic = cfg.inequalities;
    need(ic.samples > 0, "inequalities.samples", "samples must be > 0");
    need(!ic.c_cap || *ic.c_cap > 0.0, "inequalities.c_cap", "c_cap must be > 0");
    need(ic.sampler.max_modes >= 0, "inequalities.max_modes", "max_modes must be >= 0");
    need(ic.sampler.phi_min > 0.0, "inequalities.phi_min", "phi_min must be > 0");
    need(ic.sampler.psi_min > 0.0, "inequalities.psi_min", "psi_min must be > 0");
    need(ic.sampler.spike_fraction >= 0.0 && ic.sampler.spike_fraction <= 1.0, "inequalities.spike_fraction",
         "spike_fraction must lie in [0, 1]");
    for (int n : ic.refinement) need(n >= 2, "inequalities.refinement", "refinement sizes must be >= 2");
  }
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : Error([&] {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  " + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

RunConfig parse_config(const std::string& text) {
  Parser parser;
  parser.parse(text);
  parser.finish();
  if (!parser.errors.empty()) throw ConfigError(parser.errors);
  parser.cfg.source = text;
  return parser.cfg;
}

void validate_config(const RunConfig& cfg) {
  Parser parser;
  parser.cfg = cfg;
  parser.check_ranges();
  if (!parser.errors.empty()) throw ConfigError(parser.errors);
}

RunOptions run_options(const RunConfig& cfg) {
  RunOptions o;
  o.horizon = cfg.horizon;
  o.sample_cadence = cfg.sample_cadence;
  o.snapshot_cadence = cfg.snapshot_cadence;
  o.stop_at_steady = cfg.stop_at_steady;
  o.steady = cfg.steady;
  o.certify = cfg.certify;
  o.track_budgets = cfg.track_budgets;
  o.diagnostics = cfg.diagnostics;
  return o;
}

StabilizationOptions stabilization_options(const RunConfig& cfg) {
  StabilizationOptions o;
  o.horizon = cfg.horizon;
  o.sample_cadence = cfg.sample_cadence;
  o.stop_at_steady = cfg.stop_at_steady;
  o.steady = cfg.steady;
  o.nonconstancy_fraction = cfg.nonconstancy_fraction;
  o.certify = cfg.certify;
  o.track_budgets = cfg.track_budgets;
  o.diagnostics = cfg.diagnostics;
  return o;
}

}  // namespace degentaxis
