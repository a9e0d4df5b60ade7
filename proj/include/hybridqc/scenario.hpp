#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hybridqc/config.hpp"
#include "hybridqc/metrics.hpp"

namespace hybridqc {

enum class GateKind { none, rz, ry, cz };
GateKind parse_gate_kind(std::string_view tag);
std::string to_string(GateKind kind);

// Everything a scenario needs, read from a config document.
struct Scenario {
  std::string name;
  ConfigDocument document;
  DeviceSpec device;
  GateKind gate = GateKind::none;
  std::string qubit;
  double angle = 0.0;
  CzVariant variant = CzVariant::scalable;
  std::optional<double> rz_detuning;
  std::string initial = "00";
  std::vector<std::string> labels;  // trajectory columns
  GateFrame frame = GateFrame::dressed;
  int cap = 2;
  bool loss = false;
  PulseShape shape = PulseShape::step;
  std::optional<double> ramp;        // ns; minimum allowed when absent
  std::optional<PulseSchedule> schedule;  // explicit pulses instead of a compiled gate

  static Scenario from_document(std::string name, ConfigDocument document);
};

std::vector<std::string> builtin_scenarios();
std::string builtin_scenario_text(std::string_view name);

// A registered name, or a path to a config file.
Scenario load_scenario(std::string_view name_or_path, const std::vector<std::string>& overrides = {});

struct RunOptions {
  std::optional<Picture> picture;
  std::optional<Integrator> integrator;
  std::optional<double> tolerance;
  std::optional<double> grid;
  bool trajectory = true;
};

struct ScenarioResult {
  std::string name;
  PulseSchedule schedule;
  GateReport report;
  Trajectory trajectory;
  double max_norm_drift = 0.0;
  double excitation_drift = 0.0;
  double norm_deficit = 0.0;
  double resonant_time = 0.0;  // ns spent in resonant pulses
  std::vector<std::string> warnings;
  nlohmann::ordered_json summary;
  std::string csv;
};

PulseSchedule scenario_schedule(const System& system, const Scenario& scenario);
Eigen::MatrixXcd scenario_ideal(const System& system, const Scenario& scenario);

ScenarioResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

// Writes <dir>/<name>.csv and <dir>/<name>.json through temporary files.
std::vector<std::filesystem::path> write_result(const ScenarioResult& result, const std::filesystem::path& dir);

struct SweepRow {
  std::string value;
  std::optional<ScenarioResult> result;
  std::string error;
  int exit_code = 0;
};

std::vector<SweepRow> sweep(std::string_view name_or_path, const std::string& path, const std::vector<std::string>& values,
                            const std::vector<std::string>& overrides = {}, const RunOptions& options = {});
std::string sweep_table(const std::vector<SweepRow>& rows);

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace hybridqc
