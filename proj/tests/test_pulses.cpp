#include <algorithm>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "hybridqc/dynamics.hpp"
#include "hybridqc/errors.hpp"
#include "hybridqc/metrics.hpp"
#include "hybridqc/scenario.hpp"
#include "hybridqc/units.hpp"

using namespace hybridqc;
namespace u = hybridqc::units;

namespace {

const System& scalable() {
  static const System s(load_scenario("fig3a").device, 2);
  return s;
}

const System& single_cavity() {
  static const System s(load_scenario("fig4").device, 2);
  return s;
}

DeviceSpec lone_mode() {
  DeviceSpec d;
  d.name = "lone";
  d.modes.push_back({"C", u::ghz(10.0), 1, 0.1});
  return d;
}

double wrap(double x) { return std::remainder(x, u::two_pi); }

// Idle eigenvector with the largest weight on a bare state, from a dense
// solve of the full Hamiltonian; phase fixed so that weight is real positive.
std::pair<double, Eigen::VectorXcd> idle_eigenstate(const System& sys, std::size_t bare) {
  const std::vector<double> zero(sys.device().modes.size(), 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sys.dense_hamiltonian(zero, Picture::schrodinger, 0.0).real());
  long best = 0;
  eig.eigenvectors().row(static_cast<long>(bare)).cwiseAbs().maxCoeff(&best);
  Eigen::VectorXcd v = eig.eigenvectors().col(best).cast<std::complex<double>>();
  if (v(static_cast<long>(bare)).real() < 0) v = -v;
  return {eig.eigenvalues()(best), v};
}

// Largest |detuning| a schedule puts on each mode, sampled finely.
double worst_detuning(const PulseSchedule& s, const std::string& mode) {
  double worst = 0.0;
  for (int i = 0; i <= 20000; ++i) worst = std::max(worst, std::abs(s.detuning_at(mode, s.duration * i / 20000.0)));
  return worst;
}

}  // namespace

TEST_CASE("step and trapezoid detuning profiles") {
  PulseSchedule s;
  s.pulses.push_back({"A", u::ghz(0.1), 5.0, 4.0, PulseShape::step, 0.0, "x"});
  s.duration = 10.0;
  CHECK(detuning_at(s, "A", 4.0) == doctest::Approx(u::two_pi * 0.1));
  CHECK(detuning_at(s, "A", 8.0) == 0.0);
  CHECK(detuning_at(s, "A", 2.5) == 0.0);
  CHECK(detuning_at(s, "B", 5.0) == 0.0);

  PulseSchedule r;
  r.pulses.push_back({"A", 2.0, 5.0, 4.0, PulseShape::ramp, 1.0, "x"});
  r.duration = 10.0;
  // rising edge spans [2.5, 3.5]
  CHECK(detuning_at(r, "A", 3.0) == doctest::Approx(1.0));
  CHECK(detuning_at(r, "A", 3.25) == doctest::Approx(1.5));
  CHECK(detuning_at(r, "A", 5.0) == doctest::Approx(2.0));
  CHECK(detuning_at(r, "A", 7.0) == doctest::Approx(1.0));
  CHECK(detuning_at(r, "A", 2.4) == 0.0);

  // overlapping pulses on one mode add up
  s.pulses.push_back({"A", -0.5, 6.0, 2.0, PulseShape::step, 0.0, "y"});
  CHECK(detuning_at(s, "A", 6.0) == doctest::Approx(u::two_pi * 0.1 - 0.5));
  const auto bp = s.breakpoints(0.0, 10.0);
  CHECK(bp == std::vector<double>{3.0, 5.0, 7.0});
}

TEST_CASE("appending schedules shifts the later pulses") {
  PulseSchedule a, b;
  a.pulses.push_back({"A", 1.0, 1.0, 2.0, PulseShape::step, 0.0, "a"});
  a.duration = 3.0;
  b.pulses.push_back({"B", 2.0, 0.5, 1.0, PulseShape::step, 0.0, "b"});
  b.duration = 1.0;
  const auto c = a.then(b);
  CHECK(c.duration == 4.0);
  CHECK(c.pulses[1].center == 3.5);
  CHECK(c.detuning_at("B", 3.2) == 2.0);
}

TEST_CASE("bare phase rule: pi at 0.1 GHz takes 5 ns") {
  RzOptions o;
  o.detuning = u::ghz(0.1);
  o.dispersive_correction = false;
  const auto s = compile_rz(scalable(), "A", u::pi, o);
  REQUIRE(s.pulses.size() == 1);
  CHECK(s.pulses[0].mode == "A");
  CHECK(s.pulses[0].shape == PulseShape::step);
  CHECK(s.pulses[0].detuning == doctest::Approx(u::ghz(0.1)));
  CHECK(s.pulses[0].duration == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(s.duration == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("phase gate angle handling") {
  CHECK(compile_rz(scalable(), "A", 0.0).pulses.empty());
  CHECK(compile_rz(scalable(), "A", u::two_pi).pulses.empty());
  CHECK(compile_rz(scalable(), "A", u::two_pi + u::pi / 2) == compile_rz(scalable(), "A", u::pi / 2));
  CHECK(compile_rz(scalable(), "A", -u::pi / 2) == compile_rz(scalable(), "A", 3 * u::pi / 2));
}

TEST_CASE("phase gate detuning errors list the feasible interval") {
  RzOptions o;
  o.detuning = u::ghz(5.0);
  try {
    compile_rz(scalable(), "A", u::pi, o);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("feasible detunings for mode A") != std::string::npos);
    CHECK(e.exit_code() == 1);
  }
  // 19.84 GHz ensemble sits 2.16 GHz below mode A
  o.detuning = u::ghz(-2.16);
  CHECK_THROWS_WITH_AS(compile_rz(scalable(), "A", u::pi, o), doctest::Contains("resonance"), ValidationError);
  CHECK_THROWS_AS(compile_rz(scalable(), "B", u::pi), ValidationError);
}

TEST_CASE("phase gate on a superposition: relative phase, unchanged populations") {
  const System& sys = scalable();
  RzOptions o;
  o.detuning = u::ghz(0.1);
  const auto s = compile_rz(sys, "A", u::pi, o);
  const auto [e0, d0] = idle_eigenstate(sys, sys.state_index("00"));
  const auto [e1, d1] = idle_eigenstate(sys, sys.state_index("10"));
  const Eigen::VectorXcd psi = evolve(sys, (d0 + d1) / std::sqrt(2.0), s);
  const double t = s.duration;
  const std::complex<double> c0 = d0.dot(psi) * std::polar(1.0, e0 * t);
  const std::complex<double> c1 = d1.dot(psi) * std::polar(1.0, e1 * t);
  CHECK(std::norm(c0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::norm(c1) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(wrap(std::arg(c1 / c0) - u::pi)) < 1e-6);
}

TEST_CASE("phase gates add when pulses at one detuning are concatenated") {
  const System& sys = scalable();
  RzOptions o;
  o.detuning = u::ghz(-0.1);
  o.whole_turns = false;
  const auto split = compile_rz(sys, "A", u::pi / 4, o).then(compile_rz(sys, "A", u::pi / 2, o));
  const auto joint = compile_rz(sys, "A", 3 * u::pi / 4, o);
  CHECK(split.duration == doctest::Approx(joint.duration).epsilon(1e-12));
  const Eigen::VectorXcd psi = (sys.state("00") + sys.state("10") + sys.state("01") - sys.state("11")) / 2.0;
  const Eigen::VectorXcd a = evolve(sys, psi, split), b = evolve(sys, psi, joint);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("whole-turn detuning nudge removes the switching error") {
  const System& sys = scalable();
  for (double angle : {u::pi / 4, u::pi / 2, u::pi}) {
    RzOptions o;
    o.detuning = u::ghz(0.1);
    const auto nudged = gate_matrix(sys, compile_rz(sys, "A", angle, o), ideal_rz(2, 0, angle), "rz");
    o.whole_turns = false;
    const auto plain = gate_matrix(sys, compile_rz(sys, "A", angle, o), ideal_rz(2, 0, angle), "rz");
    CHECK(nudged.distance < 1e-6);
    CHECK(nudged.distance < 0.01 * plain.distance);
  }
}

TEST_CASE("exchange rotation: resonant segment length and population transfer") {
  const System& sys = scalable();
  const auto& spin = sys.device().spin("A");
  const auto& mode = sys.device().mode("A");
  CHECK(u::to_mhz(spin.coupling) == doctest::Approx(60.0));
  const auto s = compile_ry(sys, "A", u::pi);
  REQUIRE(!s.pulses.empty());
  const Pulse& res = s.pulses.front();
  CHECK(res.stage == "ry");
  CHECK(u::pi / spin.coupling == doctest::Approx(8.3333).epsilon(1e-4));
  CHECK(std::abs(res.duration - u::pi / spin.coupling) < 1e-3 * u::pi / spin.coupling);
  CHECK(std::abs(res.detuning - (spin.gap - mode.idle_frequency())) < u::mhz(5.0));
  for (std::size_t i = 1; i < s.pulses.size(); ++i) CHECK(s.pulses[i].stage == "ry-phase");

  const Eigen::VectorXcd psi = evolve(sys, sys.state("00"), s);
  CHECK(std::norm(psi(static_cast<long>(sys.state_index("10")))) >= 0.999);
}

TEST_CASE("full Rabi period returns with a sign flip") {
  const System& sys = scalable();
  const auto s = compile_ry(sys, "A", u::two_pi);
  PulseSchedule resonant;
  resonant.pulses.push_back(s.pulses.front());
  resonant.duration = s.pulses.front().duration;
  const std::size_t photon = sys.state_index("10");
  const Eigen::VectorXcd psi = evolve(sys, sys.state("10"), resonant);
  const std::vector<double> det = resonant.detunings_at(sys.device(), 0.5 * resonant.duration);
  const double free = sys.diagonal(det)(static_cast<long>(photon)) * resonant.duration;
  const std::complex<double> ratio = psi(static_cast<long>(photon)) * std::polar(1.0, free);
  CHECK(std::abs(ratio) > 0.99);
  CHECK(std::abs(wrap(std::arg(ratio) - u::pi)) < 2e-2);
}

TEST_CASE("two half turns bring the qubit back") {
  const System& sys = scalable();
  const auto once = compile_ry(sys, "A", u::pi);
  const auto r = gate_matrix(sys, once.then(once), ideal_identity(2), "ry2");
  CHECK(std::abs(r.matrix(0, 0)) >= 1.0 - 1e-6);
}

TEST_CASE("exchange rotation errors") {
  DeviceSpec d = load_scenario("fig3a").device;
  d.spins[0].gap = u::ghz(30.0);
  const System far(d, 2);
  CHECK_THROWS_WITH_AS(compile_ry(far, "A", u::pi), doctest::Contains("beyond the bound"), ValidationError);
  CHECK_THROWS_AS(compile_ry(scalable(), "A", -0.1), ValidationError);
  CHECK_THROWS_AS(compile_ry(scalable(), "A", 7.0), ValidationError);
  CHECK(compile_ry(scalable(), "A", 0.0).pulses.empty());
}

TEST_CASE("hop transfer takes a quarter period, checked on a bare pair") {
  const double kappa = u::mhz(25.0);
  // Fixed-step RK4 on the 2x2 exchange with off-diagonal -kappa.
  Eigen::Matrix2cd h;
  h << 0.0, -kappa, -kappa, 0.0;
  Eigen::Vector2cd y(1.0, 0.0);
  const double t_end = u::pi / (2.0 * kappa);
  CHECK(t_end == doctest::Approx(10.0).epsilon(1e-12));
  const int steps = 20000;
  const double dt = t_end / steps;
  const std::complex<double> mi(0.0, -1.0);
  for (int k = 0; k < steps; ++k) {
    const Eigen::Vector2cd k1 = mi * h * y;
    const Eigen::Vector2cd k2 = mi * h * (y + 0.5 * dt * k1);
    const Eigen::Vector2cd k3 = mi * h * (y + 0.5 * dt * k2);
    const Eigen::Vector2cd k4 = mi * h * (y + dt * k3);
    y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  CHECK(std::norm(y(1)) == doctest::Approx(1.0).epsilon(1e-10));

  const System sys(load_scenario("fig3b").device, 2);
  const auto cz = compile_cz(sys, CzVariant::scalable);
  for (const auto& p : cz.pulses)
    if (p.stage == "cz-hop-in" || p.stage == "cz-hop-out") CHECK(std::abs(p.duration - t_end) < 1e-2 * t_end);
}

TEST_CASE("CZ stage durations") {
  const System sys(load_scenario("fig3b").device, 2);
  const double g = u::mhz(60.0);
  const auto cz = compile_cz(sys, CzVariant::scalable);
  int absorb = 0, cycle = 0;
  for (const auto& p : cz.pulses) {
    if (p.stage == "cz-absorb" || p.stage == "cz-release") {
      ++absorb;
      CHECK(std::abs(p.duration - u::pi / g) < 1e-2 * u::pi / g);
      CHECK(p.duration == doctest::Approx(8.33).epsilon(1e-2));
    }
    if (p.stage == "cz-cycle") {
      ++cycle;
      CHECK(p.duration == doctest::Approx(16.7).epsilon(1e-2));
    }
  }
  CHECK(absorb == 2);
  CHECK(cycle == 1);
  // stage 1 and stage 5 pulses start together
  std::vector<double> starts;
  for (const auto& p : cz.pulses)
    if (p.stage == "cz-hop-in") starts.push_back(p.start());
  REQUIRE(starts.size() == 4);
  CHECK(*std::max_element(starts.begin(), starts.end()) == *std::min_element(starts.begin(), starts.end()));

  const auto single = compile_cz(single_cavity(), CzVariant::single_cavity);
  CHECK(single.duration > 30.0);
  CHECK(single.duration < 36.0);
  CHECK(std::none_of(single.pulses.begin(), single.pulses.end(),
                     [](const Pulse& p) { return p.stage.rfind("cz-hop", 0) == 0; }));
}

TEST_CASE("CZ truth table and repetition") {
  const System sys(load_scenario("fig3b").device, 2);
  const auto cz = compile_cz(sys, CzVariant::scalable);
  const auto once = gate_matrix(sys, cz, ideal_cz(), "cz");
  const double ref = std::arg(once.matrix(0, 0));
  const double want[4] = {0.0, 0.0, 0.0, u::pi};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(wrap(std::arg(once.matrix(i, i)) - ref - want[i])) < 5e-2);

  const auto twice = gate_matrix(sys, cz.then(cz), ideal_identity(2), "cz2");
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 4; ++i) {
    const double p = wrap(std::arg(twice.matrix(i, i)) - std::arg(twice.matrix(0, 0)));
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  CHECK(hi - lo < 1e-3);
}

TEST_CASE("CZ needs the right hardware") {
  const System qubit_only(load_scenario("fig3a").device, 1);
  CHECK_THROWS_AS(compile_cz(qubit_only, CzVariant::scalable), ValidationError);
  CHECK_THROWS_AS(compile_cz(scalable(), CzVariant::single_cavity), ValidationError);
  DeviceSpec d = load_scenario("fig3b").device;
  d.cpb.reset();
  CHECK_THROWS_AS(compile_cz(System(d, 2), CzVariant::scalable), ValidationError);
}

TEST_CASE("ledger phases of a single off-resonant pulse") {
  const System sys(lone_mode(), 1);
  PulseSchedule s;
  const double delta = u::ghz(0.3), tau = 2.0;
  s.pulses.push_back({"C", delta, 1.5, tau, PulseShape::step, 0.0, "x"});
  s.duration = 3.0;
  const auto ledger = phase_ledger(sys, s, {"n(C)=1", "vac"});
  CHECK(std::abs(wrap(ledger.phase("n(C)=1") - delta * tau)) < 1e-12);
  CHECK(std::abs(ledger.phase("vac")) < 1e-12);
  CHECK(ledger.at("n(C)=1").population == doctest::Approx(1.0));
  CHECK_THROWS_AS(ledger.at("missing"), ValidationError);
}

TEST_CASE("ledger agrees with propagation on compiled gates") {
  const System sys(load_scenario("fig3b").device, 2);
  const auto cz = compile_cz(sys, CzVariant::scalable);
  const std::vector<std::string> labels{"00", "01", "10", "11"};
  const auto ledger = phase_ledger(sys, cz, labels);
  CHECK(std::abs(wrap(ledger.phase("01") - ledger.phase("00"))) < 1e-6);
  CHECK(std::abs(wrap(ledger.phase("11") - ledger.phase("00") - u::pi)) < 1e-6);
  const auto report = gate_matrix(sys, cz, ideal_cz(), "cz");
  for (int i = 0; i < 4; ++i) {
    // amplitude = sqrt(population) exp(-i phase)
    const double numeric = std::arg(report.matrix(i, i)) - std::arg(report.matrix(0, 0));
    const double predicted = -(ledger.phase(labels[i]) - ledger.phase("00"));
    CHECK(std::abs(wrap(numeric - predicted)) < 1e-6);
  }

  RzOptions o;
  o.detuning = u::ghz(0.1);
  const auto rz = compile_rz(sys, "A", u::pi / 2, o);
  const auto l2 = phase_ledger(sys, rz, labels);
  CHECK(std::abs(wrap(l2.phase("10") - l2.phase("00") + u::pi / 2)) < 1e-6);
  CHECK(std::abs(wrap(l2.phase("01") - l2.phase("00"))) < 1e-6);
}

TEST_CASE("ledger rejects states that end up split") {
  const System& sys = scalable();
  const auto half = compile_ry(sys, "A", u::pi / 2);
  CHECK_THROWS_WITH_AS(phase_ledger(sys, half, {"00"}), doctest::Contains("not expressible"), ValidationError);
}

TEST_CASE("compilers are deterministic") {
  const System& sys = scalable();
  CHECK(compile_rz(sys, "A", 1.234) == compile_rz(sys, "A", 1.234));
  CHECK(compile_ry(sys, "A", u::pi) == compile_ry(sys, "A", u::pi));
  const System b(load_scenario("fig3b").device, 2);
  CHECK(compile_cz(b, CzVariant::scalable) == compile_cz(b, CzVariant::scalable));
  CHECK(compile_cz(single_cavity(), CzVariant::single_cavity) ==
        compile_cz(single_cavity(), CzVariant::single_cavity));
}

TEST_CASE("compiled schedules stay inside the tuning bounds or say so") {
  const System b(load_scenario("fig3b").device, 2);
  std::vector<std::pair<const System*, PulseSchedule>> all{
      {&scalable(), compile_rz(scalable(), "A", u::pi)},
      {&scalable(), compile_rz(scalable(), "A'", u::pi / 3)},
      {&scalable(), compile_ry(scalable(), "A", u::pi)},
      {&scalable(), compile_ry(scalable(), "A'", u::pi / 2)},
      {&b, compile_cz(b, CzVariant::scalable)},
      {&single_cavity(), compile_cz(single_cavity(), CzVariant::single_cavity)}};
  for (const auto& [sys, s] : all)
    for (const auto& m : sys->device().modes) {
      const bool inside = m.within_bounds(worst_detuning(s, m.label));
      CHECK((inside || !s.warnings.empty()));
    }

  PulseSchedule wild;
  wild.pulses.push_back({"A", u::ghz(3.0), 1.0, 2.0, PulseShape::step, 0.0, "x"});
  wild.duration = 2.0;
  check_schedule(scalable().device(), wild);
  REQUIRE(wild.warnings.size() == 1);
  CHECK(wild.warnings[0].find("beyond its bound") != std::string::npos);
}

TEST_CASE("schedule structure checks") {
  const auto& d = scalable().device();
  PulseSchedule s;
  s.pulses.push_back({"Z", 1.0, 1.0, 2.0, PulseShape::step, 0.0, "x"});
  s.duration = 2.0;
  CHECK_THROWS_AS(check_schedule(d, s), ValidationError);
  s.pulses[0] = {"A", 1.0, 1.0, 0.0, PulseShape::step, 0.0, "x"};
  CHECK_THROWS_AS(check_schedule(d, s), ValidationError);
  s.pulses[0] = {"A", 1.0, 1.0, 2.0, PulseShape::step, 0.0, "x"};
  s.duration = 1.0;
  CHECK_THROWS_AS(check_schedule(d, s), ValidationError);
  // ramp faster than 50 / omega
  s.duration = 4.0;
  s.pulses[0] = {"A", 1.0, 2.0, 2.0, PulseShape::ramp, 0.1, "x"};
  CHECK_THROWS_WITH_AS(check_schedule(d, s), doctest::Contains("too fast"), ValidationError);
}

TEST_CASE("ramped schedules") {
  const System& sys = scalable();
  const auto step = compile_ry(sys, "A", u::pi);
  const double tr = minimum_ramp_time(sys.device(), step);
  CHECK(tr * sys.device().mode("A").idle_frequency() == doctest::Approx(50.0));
  CHECK_THROWS_AS(with_ramps(sys.device(), step, 0.0), ValidationError);
  const auto ramped = with_ramps(sys.device(), step, tr);
  CHECK_FALSE(ramped.steps_only());
  CHECK_THROWS_AS(with_ramps(sys.device(), ramped, tr), ValidationError);
  REQUIRE(ramped.pulses.size() == step.pulses.size());
  for (const auto& p : ramped.pulses) {
    CHECK(p.shape == PulseShape::ramp);
    CHECK(p.ramp == tr);
    CHECK(p.ramp <= p.duration);
  }
  // pulses do not overlap and keep their order
  for (std::size_t i = 1; i < ramped.pulses.size(); ++i)
    CHECK(ramped.pulses[i].support_start() >= ramped.pulses[i - 1].support_end() - 1e-12);

  // off-resonant pulses keep their area, short ones become triangles
  PulseSchedule off;
  off.pulses.push_back({"A", u::ghz(0.5), 1.0, 2.0, PulseShape::step, 0.0, "x"});
  off.pulses.push_back({"A", u::ghz(0.5), 2.1, 0.2, PulseShape::step, 0.0, "y"});
  off.duration = 2.2;
  const auto r = with_ramps(sys.device(), off, 0.4);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(r.pulses[i].detuning * r.pulses[i].duration ==
          doctest::Approx(off.pulses[i].detuning * off.pulses[i].duration).epsilon(1e-12));
    CHECK(r.pulses[i].duration >= r.pulses[i].ramp);
  }
}
