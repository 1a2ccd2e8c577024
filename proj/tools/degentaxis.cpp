// Command-line front end: run, steady, sweep, verify-inequalities, dual-norm.
#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "degentaxis/commands.hpp"
#include "degentaxis/parallel.hpp"

namespace dt = degentaxis;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool certify = false;
  int threads = 1;
};

void add_common(CLI::App* cmd, Common& c, bool need_config) {
  auto* opt = cmd->add_option("--config", c.config, "config file (sectioned key = value)");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (default: [output] directory, $DEGENTAXIS_OUT, ./degentaxis-out)");
  cmd->add_option("--seed", c.seed, "overrides [initial] seed and [inequalities] seed");
  cmd->add_flag("--certify", c.certify, "refuse alpha outside (3/2, 19/12)");
  cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

dt::RunConfig load(const Common& c) {
  std::ifstream in(c.config);
  if (!in) throw dt::InvalidArgument("cannot read config " + c.config);
  std::stringstream text;
  text << in.rdbuf();
  dt::RunConfig cfg = dt::parse_config(text.str());
  if (c.seed) {
    cfg.initial.seed = *c.seed;
    cfg.inequalities.seed = *c.seed;
  }
  if (c.certify) cfg.certify = true;
  dt::validate_config(cfg);
  return cfg;
}

std::filesystem::path out_dir(const Common& c, const dt::RunConfig& cfg) {
  if (!c.out.empty()) return c.out;
  if (!cfg.output.directory.empty()) return cfg.output.directory;
  if (const char* env = std::getenv("DEGENTAXIS_OUT"); env && *env) return env;
  return "degentaxis-out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"degentaxis: finite-volume simulator for doubly degenerate nutrient taxis"};
  app.require_subcommand(1);

  Common run_c, steady_c, sweep_c, ineq_c, dn_c;
  auto* run_cmd = app.add_subcommand("run", "integrate one trajectory");
  add_common(run_cmd, run_c, true);
  auto* steady_cmd = app.add_subcommand("steady", "run until steady state and judge the stabilization verdicts");
  add_common(steady_cmd, steady_c, true);
  auto* sweep_cmd = app.add_subcommand("sweep", "v0 scaling sweep with fitted exponent");
  add_common(sweep_cmd, sweep_c, true);
  auto* ineq_cmd = app.add_subcommand("verify-inequalities", "fit constants and hunt for inequality violations");
  add_common(ineq_cmd, ineq_c, true);
  auto* dn_cmd = app.add_subcommand("dual-norm", "dual norm distance between two snapshots");
  std::string snap_a, snap_b;
  dn_cmd->add_option("a", snap_a, "first DEGTAX1 snapshot")->required()->check(CLI::ExistingFile);
  dn_cmd->add_option("b", snap_b, "second DEGTAX1 snapshot")->required()->check(CLI::ExistingFile);
  add_common(dn_cmd, dn_c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? dt::kExitOk : dt::kExitError;
  }

  try {
    if (dn_cmd->parsed()) {
      dt::set_thread_count(dn_c.threads);
      return dt::command_dual_norm(snap_a, snap_b, std::cout);
    }
    struct Entry {
      CLI::App* cmd;
      Common* c;
      int (*fn)(const dt::RunConfig&, const std::filesystem::path&, std::ostream&);
    };
    for (const Entry& e : {Entry{run_cmd, &run_c, dt::command_run}, Entry{steady_cmd, &steady_c, dt::command_steady},
                           Entry{sweep_cmd, &sweep_c, dt::command_sweep},
                           Entry{ineq_cmd, &ineq_c, dt::command_verify_inequalities}}) {
      if (!e.cmd->parsed()) continue;
      dt::set_thread_count(e.c->threads);
      const dt::RunConfig cfg = load(*e.c);
      return e.fn(cfg, out_dir(*e.c, cfg), std::cout);
    }
  } catch (const dt::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return dt::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dt::kExitError;
  }
  return dt::kExitError;
}
