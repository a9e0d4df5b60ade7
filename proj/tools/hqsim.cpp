// Command-line front end for the hybrid spin-photon simulator.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hybridqc/config.hpp"
#include "hybridqc/errors.hpp"
#include "hybridqc/scenario.hpp"
#include "hybridqc/units.hpp"

namespace fs = std::filesystem;
using namespace hybridqc;

namespace {

fs::path default_out() {
  if (const char* env = std::getenv("HQSIM_OUT"); env && *env) return env;
  return ".";
}

struct RunFlags {
  std::vector<std::string> overrides;
  std::string out;
  double grid = 0.0, tol = 0.0;
  std::string picture, integrator;

  RunOptions options() const {
    RunOptions o;
    if (grid > 0.0) o.grid = grid;
    if (tol > 0.0) o.tolerance = tol;
    if (!picture.empty()) o.picture = parse_picture(picture);
    if (!integrator.empty()) o.integrator = parse_integrator(integrator);
    return o;
  }
  fs::path dir() const { return out.empty() ? default_out() : fs::path(out); }
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--override", f.overrides, "config override, section.label.key=value")->take_all();
  cmd->add_option("--out", f.out, "output directory (default $HQSIM_OUT or .)");
  cmd->add_option("--grid", f.grid, "output grid spacing in ns");
  cmd->add_option("--tol", f.tol, "relative integrator tolerance");
  cmd->add_option("--picture", f.picture, "schrodinger or interaction");
  cmd->add_option("--integrator", f.integrator, "piecewise-exact or adaptive");
}

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(item);
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int validate_file(const std::string& path) {
  const std::string text = read_text(path);
  ConfigDocument doc = ConfigDocument::parse(text);
  const DeviceSpec device = device_from_document(doc);
  if (doc.section("scenario") || doc.section("schedule")) Scenario::from_document(fs::path(path).stem().string(), doc);
  const ValidationReport report = validate_device(device);
  for (const auto& f : report.findings)
    std::cout << (f.severity == Severity::error ? "error" : "warning") << ' ' << f.code << ' ' << f.subject << ": "
              << f.message << '\n';
  std::cout << (report.ok() ? "ok" : "invalid") << ": " << report.errors().size() << " error(s), "
            << report.warnings().size() << " warning(s)\n";
  return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hqsim: pulse-level simulator for hybrid spin-photon qubits"};
  app.require_subcommand(1);

  RunFlags run_flags;
  std::string run_name;
  auto* run = app.add_subcommand("run", "run a built-in scenario or a scenario config file");
  run->add_option("scenario", run_name, "scenario name or config path")->required();
  add_run_flags(run, run_flags);

  RunFlags sweep_flags;
  std::string sweep_name, sweep_param, sweep_values;
  auto* sw = app.add_subcommand("sweep", "run a scenario once per parameter value");
  sw->add_option("scenario", sweep_name, "scenario name or config path")->required();
  sw->add_option("--param", sweep_param, "override path, e.g. hops.A-B.rate")->required();
  sw->add_option("--values", sweep_values, "comma-separated values")->required();
  add_run_flags(sw, sweep_flags);

  std::string config_path;
  auto* val = app.add_subcommand("validate", "check a device or scenario config");
  val->add_option("config", config_path)->required();

  double ec = 0.0, ej = 0.0, ng = 0.5;
  int nmax = 20;
  auto* spec = app.add_subcommand("cpb-spectrum", "three lowest Cooper-pair box levels");
  spec->add_option("--ec", ec, "charging energy in GHz")->required();
  spec->add_option("--ej", ej, "Josephson energy in GHz")->required();
  spec->add_option("--ng", ng, "gate charge");
  spec->add_option("--nmax", nmax, "charge cutoff");

  auto* list = app.add_subcommand("list", "list built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      const ScenarioResult r = run_scenario(load_scenario(run_name, run_flags.overrides), run_flags.options());
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      for (const auto& p : write_result(r, run_flags.dir())) std::cout << "wrote " << p.string() << '\n';
      std::cout << r.name << ": lambda " << r.report.lambda << ", duration " << r.schedule.duration
                << " ns, norm deficit " << r.norm_deficit << '\n';
    } else if (*sw) {
      const auto rows = sweep(sweep_name, sweep_param, split_values(sweep_values), sweep_flags.overrides,
                              sweep_flags.options());
      std::string stem = fs::path(sweep_name).stem().string() + "_sweep";
      const fs::path out = sweep_flags.dir() / (stem + ".csv");
      write_file_atomic(out, sweep_table(rows));
      std::size_t failed = 0;
      for (const auto& r : rows)
        if (!r.error.empty()) {
          ++failed;
          std::cerr << "row " << r.value << ": " << r.error << '\n';
        }
      std::cout << "wrote " << out.string() << " (" << rows.size() << " rows, " << failed << " failed)\n";
    } else if (*val) {
      return validate_file(config_path);
    } else if (*spec) {
      const CpbLevels l = cpb_spectrum(units::ghz(ec), units::ghz(ej), ng, nmax);
      nlohmann::ordered_json j;
      j["format_version"] = config_format_version;
      j["ec_ghz"] = ec;
      j["ej_ghz"] = ej;
      j["ng"] = ng;
      j["nmax"] = nmax;
      j["energies_ghz"] = {units::to_ghz(l.energies[0]), units::to_ghz(l.energies[1]), units::to_ghz(l.energies[2])};
      j["gap01_ghz"] = units::to_ghz(l.gap01);
      j["gap12_ghz"] = units::to_ghz(l.gap12);
      j["charge_elements"] = l.charge_elements;
      j["relative_anharmonicity"] = l.gap01 > 0 ? std::abs(l.gap01 - l.gap12) / l.gap01 : 0.0;
      std::cout << j.dump(2) << '\n';
    } else if (*list) {
      for (const auto& n : builtin_scenarios()) {
        const Scenario s = load_scenario(n);
        std::cout << n << "  " << s.device.description << " [" << to_string(s.gate) << (s.loss ? ", lossy" : "")
                  << "]\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
