#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "degentaxis/commands.hpp"
#include "degentaxis/io.hpp"

using namespace degentaxis;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "degentaxis-unit" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

std::vector<nlohmann::json> read_ndjson(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<nlohmann::json> out;
  for (std::string line; std::getline(in, line);) out.push_back(nlohmann::json::parse(line));
  return out;
}

}  // namespace

TEST_SUITE("commands") {
  TEST_CASE("run reproduces the logistic pair") {
    const RunConfig cfg = parse_config(R"(
[grid]
dim = 1
cells = 4
[params]
dt_max = 1e-4
[run]
horizon = 1
sample_cadence = 0.5
)");
    const auto out = fresh_dir("run");
    std::ostringstream log;
    CHECK(command_run(cfg, out, log) == kExitOk);
    const auto rows = read_ndjson(out / "series.ndjson");
    REQUIRE(rows.size() == 3);
    CHECK(std::abs(rows.back()["mass_v"].get<double>() - 0.238406) <= 1e-4);
    CHECK(std::abs(rows.back()["mass_u"].get<double>() - 1.761594) <= 1e-4);
    CHECK(std::filesystem::exists(out / "final.snap"));

    const auto manifest = nlohmann::json::parse(std::ifstream(out / "manifest.json"));
    CHECK(manifest["format_version"] == 1);
    CHECK(manifest["command"] == "run");
    CHECK(manifest["config_hash"].get<std::string>().rfind("fnv1a64:", 0) == 0);

    std::ostringstream dn;
    CHECK(command_dual_norm(out / "final.snap", out / "final.snap", dn) == kExitOk);
    CHECK(dn.str() == "0\n");
  }

  TEST_CASE("dual-norm refuses mismatched grids") {
    const auto dir = fresh_dir("mismatch");
    std::filesystem::create_directories(dir);
    const RunConfig a = parse_config("[grid]\ncells = 4\n");
    const RunConfig b = parse_config("[grid]\ncells = 5\n");
    write_snapshot(dir / "a.snap", State{Field(a.grid, 1.0), Field(a.grid, 1.0), 0.0});
    write_snapshot(dir / "b.snap", State{Field(b.grid, 1.0), Field(b.grid, 1.0), 0.0});
    std::ostringstream log;
    CHECK_THROWS_AS(command_dual_norm(dir / "a.snap", dir / "b.snap", log), InvalidArgument);
  }

  TEST_CASE("verify-inequalities lists inadmissible cases without failing") {
    const RunConfig cfg = parse_config(R"(
[grid]
dim = 2
cells = 16, 16
extents = 1, 1
[inequalities]
samples = 10
refinement = 8, 16
case = quartic-signal k=-0.5 beta=2.1666666666666667 L=10
case = power-signal p0=1.6 p=2 q=5 beta=3 eta=0.5 L=10
)");
    const auto out = fresh_dir("ineq");
    std::ostringstream log;
    CHECK(command_verify_inequalities(cfg, out, log) == kExitOk);
    CHECK(log.str().find("inadmissible") != std::string::npos);
    const auto summary = nlohmann::json::parse(std::ifstream(out / "inequalities.json"));
    REQUIRE(summary.size() == 2);
    for (const auto& row : summary) {
      CHECK(row["admissible"] == false);
      CHECK_FALSE(row["violated_hypotheses"].empty());
    }
    CHECK(std::filesystem::exists(out / "inequalities.csv"));
  }

  TEST_CASE("steady writes a report") {
    const RunConfig cfg = parse_config(R"(
[grid]
cells = 8
[run]
horizon = 30
sample_cadence = 0.5
)");
    const auto out = fresh_dir("steady");
    std::ostringstream log;
    CHECK(command_steady(cfg, out, log) == kExitOk);
    const auto report = nlohmann::json::parse(std::ifstream(out / "report.json"));
    CHECK(report.contains("verdicts"));
  }
}
