#include "hybridqc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "hybridqc/errors.hpp"

namespace hybridqc {

LabeledSeries overlaps(const System& system, const Trajectory& trajectory, const std::vector<std::string>& labels) {
  LabeledSeries out;
  out.labels = labels;
  out.times = trajectory.times;
  for (const auto& label : labels) {
    const auto i = static_cast<long>(system.state_index(label));
    const double energy = system.terms().idle(i);
    std::vector<complex> series;
    series.reserve(trajectory.times.size());
    for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
      complex c = trajectory.states[k](i);
      if (trajectory.picture == Picture::schrodinger) c *= std::polar(1.0, energy * trajectory.times[k]);
      series.push_back(c);
    }
    out.values.push_back(std::move(series));
  }
  return out;
}

FidelityLoss fidelity_loss(const std::vector<Eigen::VectorXcd>& finals, const std::vector<Eigen::VectorXcd>& targets) {
  if (finals.size() != 4 || targets.size() != 4)
    throw ValidationError("fidelity loss needs exactly four final states and four targets");
  FidelityLoss out;
  for (std::size_t i = 0; i < 4; ++i) {
    if (finals[i].size() != targets[i].size()) throw ValidationError("final and target states differ in dimension");
    const double f2 = std::norm(targets[i].dot(finals[i]));
    out.fidelity_squared.push_back(f2);
    out.lambda = std::max(out.lambda, 1.0 - f2);
  }
  return out;
}

Eigen::MatrixXcd ideal_identity(std::size_t qubits) {
  const long n = 1L << qubits;
  return Eigen::MatrixXcd::Identity(n, n);
}

Eigen::MatrixXcd ideal_cz() {
  Eigen::MatrixXcd m = ideal_identity(2);
  m(3, 3) = -1.0;
  return m;
}

namespace {

// Embeds a 2x2 gate on one qubit; index 0 is the most significant label digit.
Eigen::MatrixXcd embed(std::size_t qubits, std::size_t qubit, const Eigen::Matrix2cd& g) {
  if (qubit >= qubits) throw ValidationError("qubit index out of range");
  if (qubits == 1) return g;
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  const Eigen::Matrix2cd& first = qubit == 0 ? g : id;
  const Eigen::Matrix2cd& second = qubit == 0 ? id : g;
  Eigen::MatrixXcd m(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) m(2 * a + c, 2 * b + d) = first(a, b) * second(c, d);
  return m;
}

}  // namespace

Eigen::MatrixXcd ideal_rz(std::size_t qubits, std::size_t qubit, double angle) {
  Eigen::Matrix2cd g = Eigen::Matrix2cd::Identity();
  g(1, 1) = std::polar(1.0, angle);
  return embed(qubits, qubit, g);
}

Eigen::MatrixXcd ideal_exchange(std::size_t qubits, std::size_t qubit, double angle) {
  Eigen::Matrix2cd g;
  const double c = std::cos(0.5 * angle), s = std::sin(0.5 * angle);
  g << c, complex(0.0, -s), complex(0.0, -s), c;
  return embed(qubits, qubit, g);
}

GateReport gate_matrix(const System& system, const PulseSchedule& schedule, const Eigen::MatrixXcd& ideal,
                       const std::string& gate, const GateOptions& options) {
  const auto& layout = system.layout();
  if (layout.qubits == 0) throw ValidationError("logical subspace ill-defined: device has no qubit ensembles");
  const std::vector<std::string> labels = logical_labels(layout);
  const auto n = static_cast<long>(labels.size());
  if (ideal.rows() != n || ideal.cols() != n) throw ValidationError("ideal gate has the wrong size");

  std::vector<std::size_t> bare;
  for (const auto& l : labels) bare.push_back(system.state_index(l));
  const std::vector<double> zero(system.device().modes.size(), 0.0);
  std::vector<Eigen::VectorXcd> refs;
  std::vector<double> energies;
  if (options.frame == GateFrame::dressed) {
    DressedStates d = dressed_states(system, zero, bare);
    refs = d.vectors;
    energies = d.energies;
  } else {
    for (std::size_t i = 0; i < bare.size(); ++i) {
      refs.push_back(system.state(labels[i]));
      energies.push_back(system.terms().idle(static_cast<long>(bare[i])));
    }
  }

  PropagationOptions prop = options.propagation;
  std::vector<std::future<Eigen::VectorXcd>> jobs;
  for (long c = 0; c < n; ++c)
    jobs.push_back(std::async(std::launch::async, [&, c] {
      Eigen::VectorXcd psi = refs[static_cast<std::size_t>(c)];
      if (prop.picture == Picture::interaction) {
        Eigen::VectorXcd out = evolve(system, psi, schedule, prop);
        return system.to_schrodinger(out, schedule.duration);
      }
      return evolve(system, psi, schedule, prop);
    }));
  std::vector<Eigen::VectorXcd> finals;
  for (auto& j : jobs) finals.push_back(j.get());

  const double t = schedule.duration;
  GateReport r;
  r.gate = gate;
  r.frame = options.frame;
  r.labels = labels;
  r.duration = t;
  r.ideal = ideal;
  r.matrix.resize(n, n);
  for (long row = 0; row < n; ++row)
    for (long col = 0; col < n; ++col)
      r.matrix(row, col) = std::polar(1.0, energies[static_cast<std::size_t>(row)] * t) *
                           refs[static_cast<std::size_t>(row)].dot(finals[static_cast<std::size_t>(col)]);

  long anchor = 0;
  ideal.col(0).cwiseAbs().maxCoeff(&anchor);
  const complex a = r.matrix(anchor, 0) * std::conj(ideal(anchor, 0));
  if (std::abs(a) > 0.0) r.matrix *= std::conj(a) / std::abs(a);
  r.phase_convention = anchor == 0 ? "global phase chosen so the |" + labels[0] + "> to |" + labels[0] +
                                         "> element is real and positive"
                                   : "global phase chosen so the |" + labels[0] + "> to |" +
                                         labels[static_cast<std::size_t>(anchor)] +
                                         "> element has the phase of the ideal gate";

  for (long c = 0; c < n; ++c) {
    const double f2 = std::norm(ideal.col(c).dot(r.matrix.col(c)));
    r.fidelity.push_back(std::sqrt(f2));
    r.lambda = std::max(r.lambda, 1.0 - f2);
    r.leakage.push_back(std::max(0.0, 1.0 - r.matrix.col(c).squaredNorm()));
    r.phases.push_back(std::arg(r.matrix(c, c)));
  }
  r.distance = (r.matrix - ideal).cwiseAbs().maxCoeff();
  return r;
}

nlohmann::ordered_json to_json(const GateReport& r) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["gate"] = r.gate;
  j["frame"] = to_string(r.frame);
  j["labels"] = r.labels;
  j["duration_ns"] = r.duration;
  j["lambda"] = r.lambda;
  j["fidelity"] = r.fidelity;
  j["leakage"] = r.leakage;
  j["diagonal_phase_rad"] = r.phases;
  j["distance_to_ideal"] = r.distance;
  auto matrix = [](const Eigen::MatrixXcd& m, bool imag) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (long i = 0; i < m.rows(); ++i) {
      std::vector<double> row;
      for (long k = 0; k < m.cols(); ++k) row.push_back(imag ? m(i, k).imag() : m(i, k).real());
      rows.push_back(row);
    }
    return rows;
  };
  j["matrix_re"] = matrix(r.matrix, false);
  j["matrix_im"] = matrix(r.matrix, true);
  j["ideal_re"] = matrix(r.ideal, false);
  j["ideal_im"] = matrix(r.ideal, true);
  j["global_phase_convention"] = r.phase_convention;
  return j;
}

NormDeficit norm_deficit(const Trajectory& trajectory) {
  NormDeficit out;
  if (trajectory.norm2.empty()) return out;
  out.deficit = trajectory.norm2.front() - trajectory.norm2.back();
  for (std::size_t i = 0; i + 1 < trajectory.norm2.size(); ++i)
    out.interval_decay.push_back(trajectory.norm2[i] - trajectory.norm2[i + 1]);
  return out;
}

double excitation_number(const System& system, const Eigen::VectorXcd& state) {
  const double norm = state.squaredNorm();
  if (norm == 0.0) throw ValidationError("zero state has no excitation number");
  const Eigen::VectorXd k = system.operators().excitation.diagonal();
  return state.cwiseAbs2().dot(k) / norm;
}

}  // namespace hybridqc
