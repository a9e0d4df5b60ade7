// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hybridqc/errors.hpp"
#include "hybridqc/scenario.hpp"
#include "hybridqc/units.hpp"

using namespace hybridqc;
namespace u = hybridqc::units;

namespace {

// Limits, fixed here and nowhere else.
constexpr double kCzLambda = 2e-3;
constexpr double kCzRuntimeSeconds = 60.0;
constexpr double kRyLambda = 1e-3;
constexpr double kRzPhase = 1e-6;
constexpr double kTruthPhase = 5e-2;
constexpr double kTruthOffDiagonal = 3e-2;
constexpr double kSingleCavityMin = 30.0, kSingleCavityMax = 36.0;
constexpr double kLossDeficitMin = 1e-3, kLossDeficitMax = 2e-2;
constexpr double kIdleDecay = 1e-9;
constexpr double kNormDrift = 1e-9;
constexpr double kExcitationDrift = 1e-10;
constexpr double kOracle = 1e-8;
constexpr std::size_t kOracleDimension = 36;
constexpr double kPicture = 1e-8;
constexpr double kCpbConvergence = 1e-10;
constexpr double kAnharmonicity = 0.05;
constexpr double kRampLambdaChange = 1e-3;
constexpr double kRampSlowness = 50.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double wrap(double x) { return std::remainder(x, u::two_pi); }

char buf[512];
template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

Outcome cz_lambda() {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioResult r = run_scenario(load_scenario("fig3b"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {r.report.lambda <= kCzLambda && secs < kCzRuntimeSeconds,
          fmt("fig3b lambda %.3e (limit %.0e), %.2f s (limit %.0f s)", r.report.lambda, kCzLambda, secs,
              kCzRuntimeSeconds)};
}

Outcome single_qubit() {
  const ScenarioResult ry = run_scenario(load_scenario("fig3a"));
  bool ok = ry.report.lambda <= kRyLambda;
  std::string detail = fmt("fig3a Ry(pi) lambda %.3e (limit %.0e)", ry.report.lambda, kRyLambda);

  Scenario sc = load_scenario("fig3a");
  sc.gate = GateKind::rz;
  sc.rz_detuning = u::ghz(0.1);
  const System system(sc.device, sc.cap);
  for (double phi : {u::pi / 4, u::pi / 2, u::pi}) {
    sc.angle = phi;
    const PulseSchedule s = scenario_schedule(system, sc);
    const GateReport g = gate_matrix(system, s, scenario_ideal(system, sc), "rz");
    double worst = 0.0;
    for (long i = 0; i < g.matrix.rows(); ++i)
      worst = std::max(worst, std::abs(wrap(std::arg(g.matrix(i, i) * std::conj(g.ideal(i, i))))));
    ok = ok && worst <= kRzPhase;
    detail += fmt("; Rz(%.4f) phase error %.2e", phi, worst);
  }
  return {ok, detail + fmt(" (limit %.0e)", kRzPhase)};
}

Outcome truth_table() {
  const ScenarioResult r = run_scenario(load_scenario("fig3b"));
  const Eigen::MatrixXcd& m = r.report.matrix;
  const double target[4] = {0.0, 0.0, 0.0, u::pi};
  double phase = 0.0, off = 0.0;
  for (long i = 0; i < 4; ++i) {
    phase = std::max(phase, std::abs(wrap(std::arg(m(i, i)) - target[i])));
    for (long j = 0; j < 4; ++j)
      if (i != j) off = std::max(off, std::abs(m(i, j)));
  }
  const bool fixed = std::abs(m(0, 0).imag()) < 1e-12 && m(0, 0).real() > 0.0;
  return {phase <= kTruthPhase && off < kTruthOffDiagonal && fixed,
          fmt("phase error %.2e rad (limit %.0e), off-diagonal %.2e (limit %.0e), M00 real positive: %s", phase,
              kTruthPhase, off, kTruthOffDiagonal, fixed ? "yes" : "no")};
}

Outcome single_cavity() {
  const ScenarioResult r = run_scenario(load_scenario("fig4"));
  const double t = r.schedule.duration;
  return {t >= kSingleCavityMin && t <= kSingleCavityMax && r.report.lambda <= kCzLambda,
          fmt("fig4 duration %.2f ns (window %.0f-%.0f), lambda %.3e (limit %.0e)", t, kSingleCavityMin,
              kSingleCavityMax, r.report.lambda, kCzLambda)};
}

Outcome photon_loss() {
  const ScenarioResult r = run_scenario(load_scenario("fig5b"));
  const bool band = r.norm_deficit >= kLossDeficitMin && r.norm_deficit <= kLossDeficitMax;

  // A single photon in an isolated lossy mode.
  const double rate = load_scenario("fig5b").device.loss_rate("A");
  const double idle = 200.0;
  PulseSchedule empty;
  empty.duration = idle;
  PropagationOptions o;
  o.loss = true;
  DeviceSpec lone;
  lone.name = "lone";
  lone.modes.push_back({"C", u::ghz(10.0), 1, 0.1});
  lone.loss["C"] = rate;
  const System one(lone, 1);
  const Trajectory t1 = propagate(one, one.state("n(C)=1"), empty, {0.0, idle}, o);
  double decay = 0.0;
  for (std::size_t i = 0; i < t1.times.size(); ++i)
    decay = std::max(decay, std::abs(t1.norm2[i] - std::exp(-2.0 * rate * t1.times[i])));
  return {band && decay <= kIdleDecay,
          fmt("fig5b norm deficit %.3e (band %.0e-%.0e); idle photon decay error %.2e (limit %.0e)", r.norm_deficit,
              kLossDeficitMin, kLossDeficitMax, decay, kIdleDecay)};
}

Outcome conservation() {
  double norm = 0.0, exc = 0.0;
  for (const auto& name : builtin_scenarios()) {
    Scenario base = load_scenario(name);
    const System system(base.device, base.cap);
    for (const auto& label : logical_labels(system.layout())) {
      Scenario sc = base;
      sc.initial = label;
      RunOptions o;
      o.trajectory = false;
      const ScenarioResult r = run_scenario(sc, o);
      if (!sc.loss) norm = std::max(norm, r.max_norm_drift);
      exc = std::max(exc, r.excitation_drift);
    }
  }
  return {norm <= kNormDrift && exc <= kExcitationDrift,
          fmt("worst Hermitian norm drift %.2e (limit %.0e), excitation drift %.2e (limit %.0e)", norm, kNormDrift,
              exc, kExcitationDrift)};
}

Outcome oracle() {
  double worst = 0.0;
  std::size_t dim = 0;
  for (const auto& name : builtin_scenarios()) {
    const Scenario sc = load_scenario(name);
    const System system(sc.device, sc.cap);
    dim = std::max(dim, system.dimension());
    const PulseSchedule s = scenario_schedule(system, sc);
    if (!s.steps_only()) continue;
    PropagationOptions o;
    o.loss = sc.loss;
    for (const auto& label : logical_labels(system.layout())) {
      const Eigen::VectorXcd psi = logical_state(system, label);
      const Eigen::VectorXcd a = evolve(system, psi, s, o);
      const Eigen::VectorXcd b = oracle_propagate(system, psi, s, {0.0, s.duration}, sc.loss);
      worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
    }
  }
  return {worst <= kOracle && dim <= kOracleDimension,
          fmt("largest amplitude difference %.2e (limit %.0e), largest dimension %zu", worst, kOracle, dim)};
}

Outcome pictures() {
  double worst = 0.0;
  for (const char* name : {"fig3a", "fig3b"}) {
    const Scenario sc = load_scenario(name);
    const System system(sc.device, sc.cap);
    const PulseSchedule s = scenario_schedule(system, sc);
    PropagationOptions schr, inter;
    inter.picture = Picture::interaction;
    inter.integrator = Integrator::adaptive;
    for (const auto& label : logical_labels(system.layout())) {
      const Eigen::VectorXcd psi = logical_state(system, label);
      const Trajectory a = propagate(system, psi, s, {0.0, s.duration}, schr);
      const Trajectory b = propagate(system, psi, s, {0.0, s.duration}, inter);
      if (a.times.size() != b.times.size()) return {false, "grids differ between pictures"};
      for (std::size_t k = 0; k < a.times.size(); ++k)
        worst = std::max(worst, (a.states[k].cwiseAbs2() - b.states[k].cwiseAbs2()).cwiseAbs().maxCoeff());
    }
  }
  return {worst <= kPicture, fmt("largest |c|^2 difference %.2e (limit %.0e)", worst, kPicture)};
}

Outcome cpb() {
  const double ec = u::ghz(4.9), ej = 6.2 * ec;
  const CpbLevels a = cpb_spectrum_raw(ec, ej, 0.5, 20);
  const CpbLevels b = cpb_spectrum_raw(ec, ej, 0.5, 40);
  const double d01 = std::abs(a.gap01 - b.gap01) / b.gap01;
  const double d12 = std::abs(a.gap12 - b.gap12) / b.gap12;
  const double anh = std::abs(a.gap01 - a.gap12) / a.gap01;
  return {d01 <= kCpbConvergence && d12 <= kCpbConvergence && anh > kAnharmonicity,
          fmt("gaps %.6f / %.6f GHz, n_max 20 vs 40 relative change %.1e / %.1e (limit %.0e), anharmonicity %.3f "
              "(needs > %.2f)",
              u::to_ghz(a.gap01), u::to_ghz(a.gap12), d01, d12, kCpbConvergence, anh, kAnharmonicity)};
}

Outcome ramps() {
  const ScenarioResult step = run_scenario(load_scenario("fig3a"));
  Scenario sc = load_scenario("fig3a");
  sc.shape = PulseShape::ramp;
  const System system(sc.device, sc.cap);
  const PulseSchedule s = scenario_schedule(system, sc);
  double slowness = 1e300;
  for (const auto& p : s.pulses)
    slowness = std::min(slowness, p.ramp * sc.device.mode(p.mode).idle_frequency());
  const ScenarioResult ramp = run_scenario(sc);
  const double change = std::abs(ramp.report.lambda - step.report.lambda);
  return {change < kRampLambdaChange && slowness >= kRampSlowness * (1 - 1e-12),
          fmt("lambda step %.3e, ramp %.3e, change %.2e (limit %.0e), min t_r*w %.1f", step.report.lambda,
              ramp.report.lambda, change, kRampLambdaChange, slowness)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"CZ fidelity-loss (scalable)", cz_lambda},
      {"single-qubit gates", single_qubit},
      {"CZ truth table", truth_table},
      {"single-cavity timing", single_cavity},
      {"photon loss", photon_loss},
      {"conservation", conservation},
      {"oracle equivalence", oracle},
      {"picture equivalence", pictures},
      {"CPB spectrum", cpb},
      {"ramp robustness", ramps},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
