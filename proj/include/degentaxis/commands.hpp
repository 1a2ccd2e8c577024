#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "degentaxis/config.hpp"

namespace degentaxis {

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitVerdict = 2 };

/// manifest.json contents: format version, tool version, command, config
/// hash, seed and the grid header.
nlohmann::ordered_json make_manifest(const RunConfig& cfg, const std::string& command);

/// One trajectory: manifest.json, series.ndjson, final.snap, snapshots at
/// the configured cadence and crash.snap on instability.
int command_run(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

/// Stabilization experiment run until steady state: report.json,
/// series.ndjson and final.snap. Exit 2 when v does not decay or steady
/// state is not reached.
int command_steady(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

/// v0 sweep over [sweep] scales: sweep.json. Exit 2 when the fit is
/// undefined, sigma_hat <= 0 or the variation is not monotone.
int command_sweep(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

/// Fits and checks every [inequalities] case: inequalities.csv and
/// inequalities.json. Inadmissible cases are listed, not failed; exit 2
/// only for violations at admissible points.
int command_verify_inequalities(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

/// Prints || u_a - u_b ||_* between two snapshots.
int command_dual_norm(const std::filesystem::path& a, const std::filesystem::path& b, std::ostream& log);

}  // namespace degentaxis
