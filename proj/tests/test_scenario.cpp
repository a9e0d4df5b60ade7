#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hybridqc/errors.hpp"
#include "hybridqc/scenario.hpp"
#include "hybridqc/units.hpp"

using namespace hybridqc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hybridqc_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("builtin scenarios load") {
  const auto names = builtin_scenarios();
  for (const char* n : {"fig3a", "fig3b", "fig4", "fig5a", "fig5b"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  const Scenario a = load_scenario("fig3a");
  CHECK(a.gate == GateKind::ry);
  CHECK(a.qubit == "A");
  CHECK(a.angle == doctest::Approx(units::pi));
  const Scenario b = load_scenario("fig5b");
  CHECK(b.gate == GateKind::cz);
  CHECK(b.loss);
  CHECK(load_scenario("fig4").variant == CzVariant::single_cavity);
  CHECK_THROWS_AS(load_scenario("fig9"), Error);
  CHECK_THROWS_AS(load_scenario("fig3a", {"scenario.gate=swap"}), ValidationError);
}

TEST_CASE("run summary and repeatable output") {
  const ScenarioResult r = run_scenario(load_scenario("fig3a"));
  for (const char* key : {"format_version", "scenario", "device", "gate", "qubit", "angle_rad", "lambda",
                          "gate_duration_ns", "resonant_time_ns", "max_norm_drift", "excitation_drift", "norm_deficit",
                          "initial", "trajectory_labels", "dimension", "propagation", "gate_report", "schedule",
                          "warnings"})
    CHECK_MESSAGE(r.summary.contains(key), key);
  CHECK(r.summary["propagation"]["integrator"] == "piecewise-exact");
  CHECK(r.max_norm_drift < 1e-9);
  CHECK(r.excitation_drift < 1e-10);
  CHECK(r.csv.rfind("t_ns", 0) == 0);

  const fs::path d1 = scratch("a"), d2 = scratch("b");
  const auto files1 = write_result(r, d1);
  const auto files2 = write_result(run_scenario(load_scenario("fig3a")), d2);
  REQUIRE(files1.size() == 2);
  REQUIRE(files2.size() == 2);
  for (std::size_t i = 0; i < files1.size(); ++i) {
    CHECK(files1[i].filename() == files2[i].filename());
    CHECK(slurp(files1[i]) == slurp(files2[i]));
    CHECK_FALSE(fs::exists(fs::path(files1[i]) += ".tmp"));
  }
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("CZ summary carries the phase design") {
  const ScenarioResult r = run_scenario(load_scenario("fig3b"), RunOptions{.trajectory = false});
  REQUIRE(r.summary.contains("cz_design"));
  CHECK(r.summary["cz_design"]["delays_ns"].size() == 2);
  CHECK(r.summary["variant"] == "scalable");
  CHECK(r.csv.empty());
}

TEST_CASE("hop rate sweep shortens the CZ") {
  const auto rows = sweep("fig3b", "hops.A-B.rate", {"12.5", "25", "50"}, {"hops.A'-B'.rate=25"});
  // both hops move together
  const auto both = [](const std::string& v) {
    return std::vector<std::string>{"hops.A'-B'.rate=" + v};
  };
  std::vector<double> durations;
  for (const char* v : {"12.5", "25", "50"}) {
    const auto r = sweep("fig3b", "hops.A-B.rate", {v}, both(v));
    REQUIRE(r.size() == 1);
    REQUIRE_MESSAGE(r[0].result.has_value(), r[0].error);
    durations.push_back(r[0].result->schedule.duration);
  }
  CHECK(durations[0] > durations[1]);
  CHECK(durations[1] > durations[2]);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].value == "12.5");
  for (const auto& row : rows) CHECK(row.exit_code == 0);
}

TEST_CASE("coupling sweep halves the resonant time") {
  const auto rows = sweep("fig3a", "spins.A.Gbar", {"30", "60", "120"});
  REQUIRE(rows.size() == 3);
  std::vector<double> t;
  for (const auto& row : rows) {
    REQUIRE_MESSAGE(row.result.has_value(), row.error);
    t.push_back(row.result->resonant_time);
  }
  CHECK(t[1] == doctest::Approx(0.5 * t[0]).epsilon(1e-3));
  CHECK(t[2] == doctest::Approx(0.5 * t[1]).epsilon(1e-3));
  CHECK(t[1] == doctest::Approx(units::pi / units::mhz(60.0)).epsilon(1e-3));

  const std::string table = sweep_table(rows);
  CHECK(table.rfind("value,lambda,gate_duration_ns", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 4);
}

TEST_CASE("failed sweep rows do not abort the sweep") {
  const auto rows = sweep("fig3a", "spins.A.Gbar", {"0", "60"});
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].result.has_value());
  CHECK(rows[0].exit_code == 1);
  CHECK_FALSE(rows[0].error.empty());
  CHECK(rows[1].result.has_value());
  CHECK(sweep_table(rows).find("error: ") != std::string::npos);
  CHECK(sweep("fig3a", "spins.A.Gbar", {}).empty());
}

TEST_CASE("config files and explicit schedules") {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  std::string text = builtin_scenario_text("fig3a");
  text += "\n[schedule]\nduration = 6 ns\npulse A: detuning -2.16 GHz, start 0 ns, duration 4 ns\n";
  // drop the gate so the explicit pulses are used
  const auto at = text.find("gate = ry");
  REQUIRE(at != std::string::npos);
  text.replace(at, 9, "gate = none");
  const fs::path cfg = dir / "custom.cfg";
  std::ofstream(cfg) << text;
  const Scenario sc = load_scenario(cfg.string());
  CHECK(sc.name == "custom");
  REQUIRE(sc.schedule.has_value());
  const ScenarioResult r = run_scenario(sc);
  CHECK(r.schedule.duration == 6.0);
  CHECK(r.max_norm_drift < 1e-9);
  fs::remove_all(dir);
}
