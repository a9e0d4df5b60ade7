#include "hybridqc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include "hybridqc/errors.hpp"
#include "hybridqc/units.hpp"

namespace hybridqc {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_scenarios();
}

GateKind parse_gate_kind(std::string_view tag) {
  if (tag == "none") return GateKind::none;
  if (tag == "rz") return GateKind::rz;
  if (tag == "ry") return GateKind::ry;
  if (tag == "cz") return GateKind::cz;
  throw ValidationError("unknown gate '" + std::string(tag) + "' (expected none, rz, ry or cz)");
}

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::rz: return "rz";
    case GateKind::ry: return "ry";
    case GateKind::cz: return "cz";
    default: return "none";
  }
}

namespace {

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

bool parse_flag(const ConfigSetting& s) {
  if (s.value == "on" || s.value == "true" || s.value == "yes") return true;
  if (s.value == "off" || s.value == "false" || s.value == "no") return false;
  throw ConfigError(s.line, s.key, "expected on or off, got '" + s.value + "'");
}

template <class F>
auto at_line(const ConfigSetting& s, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError(s.line, s.key, e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Scenario Scenario::from_document(std::string name, ConfigDocument document) {
  Scenario sc;
  sc.name = std::move(name);
  sc.device = device_from_document(document);
  if (document.section("schedule")) sc.schedule = schedule_from_document(document, sc.device);
  if (const ConfigSection* sec = document.section("scenario")) {
    if (!sec->entries.empty())
      throw ConfigError(sec->entries.front().line, sec->entries.front().kind, "unknown entry in [scenario]");
    for (const auto& s : sec->settings) {
      if (s.key == "gate") {
        sc.gate = at_line(s, [&] { return parse_gate_kind(s.value); });
      } else if (s.key == "qubit") {
        sc.qubit = s.value;
      } else if (s.key == "angle") {
        sc.angle = parse_angle(s.value, s.line, s.key);
      } else if (s.key == "variant") {
        sc.variant = at_line(s, [&] { return parse_cz_variant(s.value); });
      } else if (s.key == "detuning") {
        sc.rz_detuning = parse_frequency(s.value, s.line, s.key);
      } else if (s.key == "initial") {
        sc.initial = s.value;
      } else if (s.key == "labels") {
        sc.labels = split_list(s.value);
      } else if (s.key == "frame") {
        sc.frame = at_line(s, [&] { return parse_frame(s.value); });
      } else if (s.key == "cap") {
        const double c = parse_number(s.value, s.line, s.key);
        if (c < 0 || c != std::floor(c)) throw ConfigError(s.line, s.key, "cap must be a non-negative integer");
        sc.cap = static_cast<int>(c);
      } else if (s.key == "loss") {
        sc.loss = parse_flag(s);
      } else if (s.key == "shape") {
        if (s.value == "step") sc.shape = PulseShape::step;
        else if (s.value == "ramp") sc.shape = PulseShape::ramp;
        else throw ConfigError(s.line, s.key, "expected step or ramp");
      } else if (s.key == "ramp") {
        sc.ramp = parse_time(s.value, s.line, s.key);
      } else {
        throw ConfigError(s.line, s.key, "unknown key");
      }
    }
  }
  if (sc.gate != GateKind::none && sc.schedule)
    throw ValidationError("scenario '" + sc.name + "' gives both a gate and an explicit [schedule]");
  if ((sc.gate == GateKind::rz || sc.gate == GateKind::ry) && sc.qubit.empty())
    throw ValidationError("scenario '" + sc.name + "' needs a qubit for its single-qubit gate");
  sc.document = std::move(document);
  return sc;
}

std::vector<std::string> builtin_scenarios() {
  std::vector<std::string> out;
  for (const auto& [name, text] : detail::embedded_scenarios()) out.emplace_back(name);
  return out;
}

std::string builtin_scenario_text(std::string_view name) {
  for (const auto& [n, text] : detail::embedded_scenarios())
    if (n == name) return std::string(text);
  std::string known;
  for (const auto& n : builtin_scenarios()) known += (known.empty() ? "" : ", ") + n;
  throw ValidationError("unknown scenario '" + std::string(name) + "' (built in: " + known + ")");
}

Scenario load_scenario(std::string_view name_or_path, const std::vector<std::string>& overrides) {
  std::string name(name_or_path), text;
  const auto& table = detail::embedded_scenarios();
  const bool builtin = std::any_of(table.begin(), table.end(), [&](const auto& e) { return e.first == name_or_path; });
  if (builtin) {
    text = builtin_scenario_text(name_or_path);
  } else {
    const std::filesystem::path path(name_or_path);
    if (!std::filesystem::exists(path)) builtin_scenario_text(name_or_path);  // throws with the known names
    text = read_file(path);
    name = path.stem().string();
  }
  ConfigDocument doc = ConfigDocument::parse(text);
  for (const auto& o : overrides) doc.apply_override(o);
  return Scenario::from_document(name, std::move(doc));
}

PulseSchedule scenario_schedule(const System& system, const Scenario& sc) {
  PulseSchedule schedule;
  switch (sc.gate) {
    case GateKind::none:
      if (sc.schedule) schedule = *sc.schedule;
      break;
    case GateKind::rz: {
      RzOptions o;
      o.detuning = sc.rz_detuning;
      schedule = compile_rz(system, sc.qubit, sc.angle, o);
      break;
    }
    case GateKind::ry: schedule = compile_ry(system, sc.qubit, sc.angle); break;
    case GateKind::cz: schedule = compile_cz(system, sc.variant); break;
  }
  if (sc.shape == PulseShape::ramp && !schedule.pulses.empty()) {
    const double ramp = sc.ramp.value_or(minimum_ramp_time(system.device(), schedule));
    schedule = with_ramps(system.device(), schedule, ramp);
  }
  check_schedule(system.device(), schedule);
  return schedule;
}

namespace {

std::size_t qubit_position(const System& system, const std::string& qubit) {
  const auto& layout = system.layout();
  const std::size_t spin = system.device().spin_index(qubit);
  for (std::size_t q = 0; q < layout.qubits; ++q)
    if (layout.spin[q] == spin) return q;
  throw ValidationError("spin ensemble '" + qubit + "' is not a qubit of this device");
}

}  // namespace

Eigen::MatrixXcd scenario_ideal(const System& system, const Scenario& sc) {
  const std::size_t n = system.layout().qubits;
  if (n == 0) throw ValidationError("logical subspace ill-defined: device has no qubit ensembles");
  switch (sc.gate) {
    case GateKind::rz: return ideal_rz(n, qubit_position(system, sc.qubit), std::fmod(sc.angle, units::two_pi));
    case GateKind::ry: return ideal_exchange(n, qubit_position(system, sc.qubit), sc.angle);
    case GateKind::cz:
      if (n != 2) throw ValidationError("CZ needs a two-qubit device");
      return ideal_cz();
    default: return ideal_identity(n);
  }
}

namespace {

std::vector<std::string> default_labels(const System& system, const Scenario& sc) {
  std::vector<std::string> labels = logical_labels(system.layout());
  if (sc.gate == GateKind::cz) {
    if (system.layout().single_cavity) labels.insert(labels.end(), {"eta", "zeta"});
    else labels.insert(labels.end(), {"eta", "xi", "zeta"});
  }
  return labels;
}

nlohmann::ordered_json schedule_json(const PulseSchedule& s) {
  nlohmann::ordered_json j;
  j["duration_ns"] = s.duration;
  j["pulses"] = nlohmann::ordered_json::array();
  for (const auto& p : s.pulses) {
    nlohmann::ordered_json q;
    q["mode"] = p.mode;
    q["detuning_ghz"] = units::to_ghz(p.detuning);
    q["center_ns"] = p.center;
    q["duration_ns"] = p.duration;
    q["shape"] = p.shape == PulseShape::ramp ? "ramp" : "step";
    if (p.shape == PulseShape::ramp) q["ramp_ns"] = p.ramp;
    q["stage"] = p.stage;
    j["pulses"].push_back(q);
  }
  j["config"] = serialize_schedule(s);
  return j;
}

std::string trajectory_csv(const System& system, const Trajectory& traj, const std::vector<std::string>& labels) {
  const LabeledSeries series = overlaps(system, traj, labels);
  std::ostringstream out;
  out << "t_ns";
  for (const auto& l : labels) out << ',' << l << "_re," << l << "_im";
  out << ",norm2\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << format_number(traj.times[k]);
    for (const auto& v : series.values) out << ',' << format_number(v[k].real()) << ',' << format_number(v[k].imag());
    out << ',' << format_number(traj.norm2[k]) << '\n';
  }
  return out.str();
}

}  // namespace

ScenarioResult run_scenario(const Scenario& sc, const RunOptions& options) {
  const ValidationReport validation = validate_device(sc.device);
  if (!validation.ok()) {
    std::string why;
    for (const auto& f : validation.errors()) why += (why.empty() ? "" : "; ") + f.subject + ": " + f.message;
    throw ValidationError("device '" + sc.device.name + "' is invalid: " + why);
  }
  if (sc.loss && !sc.device.has_loss()) throw ValidationError("scenario asks for loss but no mode has a loss rate");

  const System system(sc.device, sc.cap);
  ScenarioResult r;
  r.name = sc.name;
  for (const auto& f : validation.warnings()) r.warnings.push_back(f.subject + ": " + f.message);

  std::optional<CzDesign> design;
  if (sc.gate == GateKind::cz && sc.shape == PulseShape::step) {
    design = design_cz(system, sc.variant);
    r.schedule = design->schedule;
    check_schedule(system.device(), r.schedule);
  } else {
    r.schedule = scenario_schedule(system, sc);
  }
  r.warnings.insert(r.warnings.end(), r.schedule.warnings.begin(), r.schedule.warnings.end());
  for (const auto& p : r.schedule.pulses)
    if (is_resonant_pulse(system.device(), r.schedule, p)) r.resonant_time += p.duration;

  PropagationOptions prop;
  prop.picture = options.picture.value_or(Picture::schrodinger);
  const bool exact_ok = r.schedule.steps_only() && prop.picture == Picture::schrodinger;
  prop.integrator = options.integrator.value_or(exact_ok ? Integrator::piecewise_exact : Integrator::adaptive);
  if (options.tolerance) prop.tolerance = *options.tolerance;
  if (options.grid) prop.grid = *options.grid;
  prop.loss = sc.loss;
  prop.validate(r.schedule);
  if (prop.grid <= 0.0) throw ValidationError("output grid spacing must be positive");

  GateOptions gate_options;
  gate_options.frame = sc.frame;
  gate_options.propagation = prop;
  r.report = gate_matrix(system, r.schedule, scenario_ideal(system, sc), to_string(sc.gate), gate_options);

  const Eigen::VectorXcd initial = logical_state(system, sc.initial);
  r.trajectory = propagate(system, initial, r.schedule, {0.0, r.schedule.duration}, prop);
  const double k0 = excitation_number(system, initial);
  for (std::size_t i = 0; i < r.trajectory.times.size(); ++i) {
    if (!sc.loss) r.max_norm_drift = std::max(r.max_norm_drift, std::abs(r.trajectory.norm2[i] - 1.0));
    r.excitation_drift = std::max(r.excitation_drift, std::abs(excitation_number(system, r.trajectory.states[i]) - k0));
  }
  r.norm_deficit = norm_deficit(r.trajectory).deficit;

  const std::vector<std::string> labels = sc.labels.empty() ? default_labels(system, sc) : sc.labels;
  if (options.trajectory) r.csv = trajectory_csv(system, r.trajectory, labels);

  nlohmann::ordered_json& j = r.summary;
  j["format_version"] = config_format_version;
  j["scenario"] = sc.name;
  j["device"] = sc.device.name;
  j["gate"] = to_string(sc.gate);
  if (sc.gate == GateKind::cz) j["variant"] = to_string(sc.variant);
  if (sc.gate == GateKind::rz || sc.gate == GateKind::ry) {
    j["qubit"] = sc.qubit;
    j["angle_rad"] = sc.angle;
  }
  j["lambda"] = r.report.lambda;
  j["gate_duration_ns"] = r.schedule.duration;
  j["resonant_time_ns"] = r.resonant_time;
  j["max_norm_drift"] = r.max_norm_drift;
  j["excitation_drift"] = r.excitation_drift;
  j["norm_deficit"] = r.norm_deficit;
  j["initial"] = sc.initial;
  j["trajectory_labels"] = labels;
  j["dimension"] = system.dimension();
  j["propagation"] = {{"picture", to_string(prop.picture)},
                      {"integrator", to_string(prop.integrator)},
                      {"tolerance", prop.tolerance},
                      {"grid_ns", prop.grid},
                      {"loss", prop.loss}};
  if (design) {
    std::vector<double> delays;
    for (double d : design->delays) delays.push_back(d);
    j["cz_design"] = {{"cycle_offset_ghz", units::to_ghz(design->offset)},
                      {"delays_ns", delays},
                      {"correction_ns", design->correction},
                      {"ledger_residual_rad", design->residual}};
  }
  j["gate_report"] = to_json(r.report);
  j["schedule"] = schedule_json(r.schedule);
  j["warnings"] = r.warnings;
  return r;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::vector<std::filesystem::path> write_result(const ScenarioResult& result, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  if (!result.csv.empty()) {
    written.push_back(dir / (result.name + ".csv"));
    write_file_atomic(written.back(), result.csv);
  }
  written.push_back(dir / (result.name + ".json"));
  write_file_atomic(written.back(), result.summary.dump(2) + "\n");
  return written;
}

std::vector<SweepRow> sweep(std::string_view name_or_path, const std::string& path, const std::vector<std::string>& values,
                            const std::vector<std::string>& overrides, const RunOptions& options) {
  RunOptions quiet = options;
  quiet.trajectory = false;
  const std::string target(name_or_path);
  std::vector<std::future<SweepRow>> jobs;
  for (const auto& v : values)
    jobs.push_back(std::async(std::launch::async, [=] {
      SweepRow row;
      row.value = v;
      try {
        std::vector<std::string> all = overrides;
        all.push_back(path + "=" + v);
        row.result = run_scenario(load_scenario(target, all), quiet);
      } catch (const Error& e) {
        row.error = e.what();
        row.exit_code = e.exit_code();
      } catch (const std::exception& e) {
        row.error = e.what();
        row.exit_code = 2;
      }
      return row;
    }));
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : c == '\n' ? std::string(" ") : std::string(1, c);
    return q + "\"";
  };
  std::ostringstream out;
  out << "value,lambda,gate_duration_ns,resonant_time_ns,norm_deficit,max_norm_drift,status\n";
  for (const auto& row : rows) {
    out << quote(row.value);
    if (row.result) {
      const auto& r = *row.result;
      out << ',' << format_number(r.report.lambda) << ',' << format_number(r.schedule.duration) << ','
          << format_number(r.resonant_time) << ',' << format_number(r.norm_deficit) << ','
          << format_number(r.max_norm_drift) << ",ok\n";
    } else {
      out << ",,,,,," << quote("error: " + row.error) << '\n';
    }
  }
  return out.str();
}

}  // namespace hybridqc
