#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hybridqc {

struct ModeSpec {
  std::string label;
  double fundamental = 0.0;  // parent-cavity fundamental, rad/ns
  int harmonic = 1;
  double tuning_range = 0.1;  // fraction of the idle frequency

  double idle_frequency() const { return harmonic * fundamental; }
  double max_detuning() const { return tuning_range * harmonic * fundamental; }
  bool within_bounds(double detuning) const;
};

struct SpinEnsembleSpec {
  std::string label;
  double gap = 0.0;
  double coupling = 0.0;  // collective, sqrt(N) times the single-spin value
  std::optional<double> spin_count;
  std::optional<double> single_spin_coupling;
  std::string mode;
};

struct CpbLevels {
  std::array<double, 3> energies{};
  double gap01 = 0.0;
  double gap12 = 0.0;
  std::array<double, 2> charge_elements{};
};

struct CpbChargeModel {
  double charging_energy = 0.0;
  double josephson_energy = 0.0;
  double gate_charge = 0.5;
  int charge_cutoff = 20;
};

// Couplings of one cavity mode to the two lowest box transitions.
struct CpbCoupling {
  std::string mode;
  double lower = 0.0;  // psi0 <-> psi1
  double upper = 0.0;  // psi1 <-> psi2
};

struct CpbSpec {
  std::string label = "B";
  std::optional<CpbChargeModel> charge_model;
  double gap01 = 0.0;
  double gap12 = 0.0;
  std::vector<CpbCoupling> couplings;

  const CpbCoupling* coupling_for(const std::string& mode) const;
};

struct HoppingLink {
  std::string first;
  std::string second;
  double rate = 0.0;
};

struct DeviceSpec {
  std::string name;
  std::string description;
  std::vector<ModeSpec> modes;
  std::vector<SpinEnsembleSpec> spins;
  std::optional<CpbSpec> cpb;
  std::vector<HoppingLink> hops;
  std::map<std::string, double> loss;

  int mode_index(const std::string& label) const;  // -1 when absent
  int spin_index(const std::string& label) const;
  const ModeSpec& mode(const std::string& label) const;
  const SpinEnsembleSpec& spin(const std::string& label) const;
  double loss_rate(const std::string& mode) const;
  bool has_loss() const;
};

// Lowest three levels of the charge-basis box Hamiltonian. Throws
// NumericError when doubling the cutoff moves a gap by more than 1e-10.
CpbLevels cpb_spectrum(double charging_energy, double josephson_energy, double gate_charge,
                       int charge_cutoff = 20);

// No convergence check; used by tests and by the convergence loop itself.
CpbLevels cpb_spectrum_raw(double charging_energy, double josephson_energy, double gate_charge,
                           int charge_cutoff);

enum class Severity { error, warning };

struct Finding {
  Severity severity;
  std::string code;
  std::string subject;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const { return error_count() == 0; }
  std::size_t error_count() const;
  std::size_t warning_count() const;
  std::vector<Finding> errors() const;
  std::vector<Finding> warnings() const;
  std::string summary() const;
};

ValidationReport validate_device(const DeviceSpec& device);

// Throws ValidationError carrying the report summary when errors are present.
void require_valid(const DeviceSpec& device);

}  // namespace hybridqc
