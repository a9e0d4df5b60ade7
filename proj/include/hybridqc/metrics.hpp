#pragma once

#include <string>
#include <vector>

#include "hybridqc/dynamics.hpp"
#include "hybridqc/pulses.hpp"
#include "json.hpp"

namespace hybridqc {

struct LabeledSeries {
  std::vector<std::string> labels;
  std::vector<double> times;
  std::vector<std::vector<complex>> values;  // values[label][time], interaction picture
};

LabeledSeries overlaps(const System& system, const Trajectory& trajectory, const std::vector<std::string>& labels);

struct FidelityLoss {
  double lambda = 0.0;
  std::vector<double> fidelity_squared;
};

// Population-return figure of merit over the four two-qubit basis inputs.
FidelityLoss fidelity_loss(const std::vector<Eigen::VectorXcd>& finals, const std::vector<Eigen::VectorXcd>& targets);

struct GateReport {
  std::string gate;
  GateFrame frame = GateFrame::dressed;
  std::vector<std::string> labels;
  Eigen::MatrixXcd matrix;
  Eigen::MatrixXcd ideal;
  double lambda = 0.0;
  std::vector<double> fidelity;
  std::vector<double> leakage;
  std::vector<double> phases;  // arg of each diagonal element after global-phase fixing
  double distance = 0.0;
  double duration = 0.0;
  std::string phase_convention;
};

nlohmann::ordered_json to_json(const GateReport& report);

struct GateOptions {
  GateFrame frame = GateFrame::dressed;
  PropagationOptions propagation;
};

GateReport gate_matrix(const System& system, const PulseSchedule& schedule, const Eigen::MatrixXcd& ideal,
                       const std::string& gate, const GateOptions& options = {});

Eigen::MatrixXcd ideal_identity(std::size_t qubits);
Eigen::MatrixXcd ideal_cz();
// diag(1, e^{i angle}) on one qubit (index 0 is the first ensemble).
Eigen::MatrixXcd ideal_rz(std::size_t qubits, std::size_t qubit, double angle);
// exp(-i angle sigma_x / 2) on one qubit: the exchange rotation of an R_y gate
// written in the basis {|0>, i|1>}.
Eigen::MatrixXcd ideal_exchange(std::size_t qubits, std::size_t qubit, double angle);

struct NormDeficit {
  double deficit = 0.0;
  std::vector<double> interval_decay;
};

NormDeficit norm_deficit(const Trajectory& trajectory);

double excitation_number(const System& system, const Eigen::VectorXcd& state);

}  // namespace hybridqc
