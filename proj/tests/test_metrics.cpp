#include <algorithm>
#include <cmath>
#include <complex>

#include "doctest.h"
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

// Largest entry difference after removing the best global phase.
double phase_free_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const complex overlap = (b.adjoint() * a).trace();
  const complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : complex(1.0);
  return (a - phase * b).cwiseAbs().maxCoeff();
}

std::vector<Eigen::VectorXcd> basis_inputs(const System& sys) {
  std::vector<Eigen::VectorXcd> out;
  for (const char* l : {"00", "01", "10", "11"}) out.push_back(sys.state(l));
  return out;
}

}  // namespace

TEST_CASE("fidelity loss basics") {
  const System& sys = scalable();
  const auto in = basis_inputs(sys);
  const FidelityLoss same = fidelity_loss(in, in);
  CHECK(same.lambda == doctest::Approx(0.0).epsilon(1e-15));
  REQUIRE(same.fidelity_squared.size() == 4);

  // phases do not matter, populations do
  std::vector<Eigen::VectorXcd> rotated = in;
  rotated[2] *= std::polar(1.0, 0.7);
  rotated[1] = std::cos(0.1) * in[1] + std::sin(0.1) * in[3];
  const FidelityLoss f = fidelity_loss(rotated, in);
  CHECK(f.fidelity_squared[2] == doctest::Approx(1.0));
  CHECK(f.lambda == doctest::Approx(std::pow(std::sin(0.1), 2)).epsilon(1e-12));

  // relabelling the inputs leaves the worst case unchanged
  std::vector<Eigen::VectorXcd> perm_final{rotated[3], rotated[1], rotated[0], rotated[2]};
  std::vector<Eigen::VectorXcd> perm_target{in[3], in[1], in[0], in[2]};
  CHECK(fidelity_loss(perm_final, perm_target).lambda == doctest::Approx(f.lambda).epsilon(1e-14));

  CHECK_THROWS_AS(fidelity_loss({in[0]}, {in[0]}), ValidationError);
  std::vector<Eigen::VectorXcd> short_state(4, Eigen::VectorXcd::Zero(2));
  CHECK_THROWS_AS(fidelity_loss(short_state, in), ValidationError);
}

TEST_CASE("idle schedule gives the identity gate") {
  const System& sys = scalable();
  PulseSchedule s;
  s.duration = 12.0;
  const GateReport r = gate_matrix(sys, s, ideal_identity(2), "I");
  CHECK(r.lambda < 1e-12);
  CHECK(r.distance < 1e-10);
  for (double p : r.phases) CHECK(std::abs(p) < 1e-10);
  for (double l : r.leakage) CHECK(l < 1e-12);
  CHECK(r.labels == std::vector<std::string>{"00", "01", "10", "11"});
}

TEST_CASE("gate matrices compose") {
  const System& sys = scalable();
  const auto first = compile_ry(sys, "A", u::pi / 2);
  const auto second = compile_rz(sys, "A'", u::pi / 3);
  const GateReport a = gate_matrix(sys, first, ideal_exchange(2, 0, u::pi / 2), "Ry");
  const GateReport b = gate_matrix(sys, second, ideal_rz(2, 1, u::pi / 3), "Rz");
  const GateReport ab = gate_matrix(sys, first.then(second), b.ideal * a.ideal, "Ry Rz");
  CHECK(phase_free_distance(ab.matrix, b.matrix * a.matrix) < 1e-6);
  CHECK(ab.duration == doctest::Approx(first.duration + second.duration));
}

TEST_CASE("ideal gates") {
  const Eigen::MatrixXcd rz = ideal_rz(2, 0, u::pi);
  Eigen::VectorXcd d(4);
  d << 1.0, 1.0, std::polar(1.0, u::pi), std::polar(1.0, u::pi);
  CHECK((rz - Eigen::MatrixXcd(d.asDiagonal())).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::MatrixXcd rz1 = ideal_rz(2, 1, u::pi / 2);
  CHECK(std::abs(rz1(1, 1) - complex(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(rz1(2, 2) - 1.0) < 1e-15);

  const Eigen::MatrixXcd x = ideal_exchange(1, 0, u::pi);
  CHECK(std::abs(x(0, 1) - complex(0.0, -1.0)) < 1e-15);
  CHECK(std::abs(x(0, 0)) < 1e-15);
  const Eigen::MatrixXcd ex = ideal_exchange(2, 1, 0.4);
  CHECK((ex.adjoint() * ex - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);

  const Eigen::MatrixXcd cz = ideal_cz();
  CHECK(cz(3, 3) == complex(-1.0));
  CHECK(cz.diagonal().head(3) == Eigen::VectorXcd::Ones(3));
  CHECK_THROWS_AS(ideal_rz(2, 2, 0.1), ValidationError);
}

TEST_CASE("overlaps cover the excited sector") {
  const System& sys = scalable();
  const auto s = compile_ry(sys, "A", u::pi / 2);
  PropagationOptions o;
  o.grid = 0.5;
  const Trajectory tr = propagate(sys, sys.state("00"), s, {0.0, s.duration}, o);
  const Eigen::VectorXd k = sys.operators().excitation.diagonal();
  const double k0 = excitation_number(sys, sys.state("00"));
  std::vector<std::string> sector;
  for (std::size_t i = 0; i < sys.dimension(); ++i)
    if (k(static_cast<long>(i)) == k0) sector.push_back(sys.describe(i));
  const LabeledSeries series = overlaps(sys, tr, sector);
  REQUIRE(series.values.size() == sector.size());
  for (std::size_t t = 0; t < series.times.size(); ++t) {
    double sum = 0.0;
    for (const auto& v : series.values) sum += std::norm(v[t]);
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }

  // a superposition input splits its weight between the two sectors
  const Eigen::VectorXcd plus = (sys.state("vac") + sys.state("00")) / std::sqrt(2.0);
  CHECK(excitation_number(sys, plus) == doctest::Approx(0.5 * k0));
  const Trajectory sup = propagate(sys, plus, s, {0.0, s.duration}, o);
  const LabeledSeries vac = overlaps(sys, sup, {"vac"});
  for (const auto& c : vac.values[0]) CHECK(std::norm(c) == doctest::Approx(0.5).epsilon(1e-10));

  // interaction-picture overlaps agree with the Schrodinger ones
  PropagationOptions oi = o;
  oi.integrator = Integrator::adaptive;
  oi.picture = Picture::interaction;
  const Trajectory tri = propagate(sys, sys.state("00"), s, {0.0, s.duration}, oi);
  const LabeledSeries a = overlaps(sys, tr, {"00"});
  const LabeledSeries b = overlaps(sys, tri, {"00"});
  for (std::size_t t = 0; t < a.times.size(); ++t) CHECK(std::abs(a.values[0][t] - b.values[0][t]) < 1e-8);
}

TEST_CASE("excitation number and norm deficit") {
  const System& sys = scalable();
  CHECK(excitation_number(sys, sys.state("vac")) == 0.0);
  CHECK(excitation_number(sys, sys.state("11")) == 2.0);
  CHECK(excitation_number(sys, 3.0 * sys.state("n(A)=1")) == 1.0);
  CHECK_THROWS_AS(excitation_number(sys, Eigen::VectorXcd::Zero(static_cast<long>(sys.dimension()))),
                  ValidationError);

  Trajectory t;
  t.norm2 = {1.0, 0.9, 0.85};
  const NormDeficit n = norm_deficit(t);
  CHECK(n.deficit == doctest::Approx(0.15));
  REQUIRE(n.interval_decay.size() == 2);
  CHECK(n.interval_decay[1] == doctest::Approx(0.05));
  CHECK(norm_deficit(Trajectory{}).deficit == 0.0);
}

TEST_CASE("gate report json") {
  const System& sys = scalable();
  RzOptions ro;
  ro.detuning = u::ghz(0.1);
  const GateReport r = gate_matrix(sys, compile_rz(sys, "A", u::pi / 2, ro), ideal_rz(2, 0, u::pi / 2), "Rz");
  const auto j = to_json(r);
  for (const char* key : {"format_version", "gate", "frame", "labels", "duration_ns", "lambda", "fidelity", "leakage",
                          "diagonal_phase_rad", "distance_to_ideal", "matrix_re", "matrix_im", "ideal_re", "ideal_im",
                          "global_phase_convention"})
    CHECK_MESSAGE(j.contains(key), key);
  CHECK(j["matrix_re"].size() == 4);
  CHECK(j["frame"] == "dressed");
  CHECK(j["lambda"].get<double>() == r.lambda);
  CHECK(std::abs(std::remainder(r.phases[2] - u::pi / 2, u::two_pi)) < 1e-6);
}

TEST_CASE("gate matrix errors") {
  const System& sys = scalable();
  PulseSchedule s;
  s.duration = 1.0;
  CHECK_THROWS_AS(gate_matrix(sys, s, ideal_identity(1), "I"), ValidationError);
  DeviceSpec bare;
  bare.name = "bare";
  bare.modes.push_back({"C", u::ghz(10.0), 1, 0.1});
  const System empty(bare, 1);
  CHECK_THROWS_AS(gate_matrix(empty, s, ideal_identity(2), "I"), ValidationError);
}
