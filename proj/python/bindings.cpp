#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hybridqc/config.hpp"
#include "hybridqc/errors.hpp"
#include "hybridqc/scenario.hpp"
#include "hybridqc/units.hpp"

namespace py = pybind11;
using namespace hybridqc;

namespace {

RunOptions run_options(std::optional<std::string> picture, std::optional<std::string> integrator,
                       std::optional<double> tolerance, std::optional<double> grid, bool trajectory) {
  RunOptions o;
  if (picture) o.picture = parse_picture(*picture);
  if (integrator) o.integrator = parse_integrator(*integrator);
  o.tolerance = tolerance;
  o.grid = grid;
  o.trajectory = trajectory;
  return o;
}

// Populations and amplitudes stay on the C++ side; Python gets the summary as
// JSON text plus the gate matrix and the sampled times.
py::dict result_dict(const ScenarioResult& r) {
  py::dict d;
  d["name"] = r.name;
  d["summary_json"] = r.summary.dump();
  d["csv"] = r.csv;
  d["matrix"] = r.report.matrix;
  d["ideal"] = r.report.ideal;
  d["times"] = r.trajectory.times;
  d["norm2"] = r.trajectory.norm2;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "hybrid spin-photon qubit simulator";

  static py::exception<ValidationError> validation_error(m, "ValidationError", PyExc_ValueError);
  static py::exception<NumericError> numeric_error(m, "NumericError", PyExc_ArithmeticError);
  static py::exception<IoError> io_error(m, "IoError", PyExc_OSError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      py::set_error(validation_error, e.what());
    } catch (const NumericError& e) {
      py::set_error(numeric_error, e.what());
    } catch (const IoError& e) {
      py::set_error(io_error, e.what());
    }
  });

  m.def("scenarios", &builtin_scenarios);
  m.def("scenario_text", [](const std::string& name) { return builtin_scenario_text(name); });

  m.def(
      "run",
      [](const std::string& scenario, const std::vector<std::string>& overrides, std::optional<std::string> picture,
         std::optional<std::string> integrator, std::optional<double> tolerance, std::optional<double> grid,
         bool trajectory) {
        const Scenario sc = load_scenario(scenario, overrides);
        const RunOptions o = run_options(picture, integrator, tolerance, grid, trajectory);
        ScenarioResult r;
        {
          py::gil_scoped_release unlocked;
          r = run_scenario(sc, o);
        }
        return result_dict(r);
      },
      py::arg("scenario"), py::arg("overrides") = std::vector<std::string>{}, py::arg("picture") = py::none(),
      py::arg("integrator") = py::none(), py::arg("tolerance") = py::none(), py::arg("grid") = py::none(),
      py::arg("trajectory") = true);

  m.def(
      "sweep",
      [](const std::string& scenario, const std::string& path, const std::vector<std::string>& values,
         const std::vector<std::string>& overrides) {
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release unlocked;
          rows = sweep(scenario, path, values, overrides);
        }
        py::list out;
        for (const auto& row : rows) {
          py::dict d;
          d["value"] = row.value;
          d["error"] = row.error;
          d["exit_code"] = row.exit_code;
          d["summary_json"] = row.result ? row.result->summary.dump() : std::string();
          out.append(d);
        }
        return out;
      },
      py::arg("scenario"), py::arg("path"), py::arg("values"), py::arg("overrides") = std::vector<std::string>{});

  m.def(
      "validate",
      [](const std::string& text) {
        const ValidationReport report = validate_device(load_device(text));
        py::list out;
        for (const auto& f : report.findings)
          out.append(py::make_tuple(f.severity == Severity::error ? "error" : "warning", f.code, f.subject, f.message));
        return out;
      },
      py::arg("text"));

  m.def(
      "cpb_spectrum",
      [](double ec, double ej, double ng, int nmax) {
        const CpbLevels l = cpb_spectrum(units::ghz(ec), units::ghz(ej), ng, nmax);
        py::dict d;
        d["energies_ghz"] = std::vector<double>{units::to_ghz(l.energies[0]), units::to_ghz(l.energies[1]),
                                                units::to_ghz(l.energies[2])};
        d["gap01_ghz"] = units::to_ghz(l.gap01);
        d["gap12_ghz"] = units::to_ghz(l.gap12);
        d["charge_elements"] = std::vector<double>{l.charge_elements[0], l.charge_elements[1]};
        return d;
      },
      py::arg("ec_ghz"), py::arg("ej_ghz"), py::arg("ng") = 0.5, py::arg("nmax") = 20);
}
