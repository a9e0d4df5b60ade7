#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hybridqc/device.hpp"

namespace hybridqc {

using complex = std::complex<double>;
using RealSparse = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using ComplexSparse = Eigen::SparseMatrix<complex, Eigen::RowMajor, int>;

enum class Picture { schrodinger, interaction };

Picture parse_picture(std::string_view tag);
std::string to_string(Picture picture);

struct BasisState {
  std::vector<int> photons;  // per mode, device order
  std::vector<int> spins;    // per ensemble, device order
  int cpb = 0;

  int total() const;
  std::vector<int> key() const;
  bool operator==(const BasisState&) const = default;
};

class BasisIndex {
 public:
  static constexpr std::size_t default_limit = 200000;

  BasisIndex(std::size_t mode_count, std::size_t spin_count, bool has_cpb, int cap,
             std::size_t limit = default_limit);

  std::size_t size() const { return states_.size(); }
  const BasisState& operator[](std::size_t i) const { return states_[i]; }
  const std::vector<BasisState>& states() const { return states_; }
  std::optional<std::size_t> find(const BasisState& s) const;
  std::size_t index_of(const BasisState& s) const;
  int cap() const { return cap_; }
  std::size_t mode_count() const { return modes_; }
  std::size_t spin_count() const { return spins_; }
  bool has_cpb() const { return has_cpb_; }

  // Dimension that a given shape would have; saturates at SIZE_MAX.
  static std::size_t count(std::size_t mode_count, std::size_t spin_count, bool has_cpb, int cap);

 private:
  std::size_t modes_, spins_;
  bool has_cpb_;
  int cap_;
  std::vector<BasisState> states_;
  std::map<std::vector<int>, std::size_t> lookup_;
};

BasisIndex build_basis(const DeviceSpec& device, int cap, std::size_t limit = BasisIndex::default_limit);

struct OperatorSet {
  std::vector<RealSparse> mode_lowering;
  std::vector<RealSparse> spin_lowering;
  std::vector<RealSparse> mode_number;
  std::vector<RealSparse> spin_number;
  std::array<RealSparse, 2> cpb_lowering;  // |psi_j><psi_j+1|
  std::array<RealSparse, 3> cpb_projector;
  RealSparse excitation;  // total excitation number
};

OperatorSet build_operators(const DeviceSpec& device, const BasisIndex& basis);

// Real symmetric element H[row][col] = H[col][row] = value; mismatch = E0[row] - E0[col].
struct Coupling {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
  double mismatch = 0.0;
};

struct HamiltonianTerms {
  Eigen::VectorXd idle;                    // static diagonal
  std::vector<Eigen::VectorXd> occupation;  // photon number of each mode per basis state
  Eigen::VectorXd loss;                    // sum of mode loss rate times photon number
  std::vector<Coupling> interaction;       // spin and box couplings
  std::vector<Coupling> hopping;
};

HamiltonianTerms build_terms(const DeviceSpec& device, const BasisIndex& basis, const OperatorSet& ops);

struct LogicalLayout {
  std::size_t qubits = 0;
  std::array<std::size_t, 2> spin{};
  std::array<std::size_t, 2> mode{};
  std::optional<std::array<std::size_t, 2>> bus;  // hop partners of the qubit modes
  bool single_cavity = false;
};

LogicalLayout logical_layout(const DeviceSpec& device);

// Immutable bundle of a device and everything derived from it.
class System {
 public:
  System(DeviceSpec device, int cap, std::size_t limit = BasisIndex::default_limit);

  const DeviceSpec& device() const { return device_; }
  const BasisIndex& basis() const { return basis_; }
  const OperatorSet& operators() const { return ops_; }
  const HamiltonianTerms& terms() const { return terms_; }
  const LogicalLayout& layout() const { return layout_; }
  std::size_t dimension() const { return basis_.size(); }

  // Neighbours of each basis state through any coupling: (index, matrix element).
  const std::vector<std::vector<std::pair<std::size_t, double>>>& adjacency() const { return adjacency_; }

  // Schrodinger-picture diagonal for constant detunings (one value per mode).
  Eigen::VectorXd diagonal(std::span<const double> detunings) const;

  // out = H in, without forming the matrix.
  void apply(std::span<const double> detunings, Picture picture, double t, bool loss,
             const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

  // out = V in, where V holds only the spin, box and hopping couplings.
  void apply_couplings(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

  ComplexSparse hamiltonian(std::span<const double> detunings, Picture picture, double t,
                            bool loss = false) const;
  Eigen::MatrixXcd dense_hamiltonian(std::span<const double> detunings, Picture picture, double t,
                                     bool loss = false) const;

  std::size_t state_index(std::string_view label) const;
  Eigen::VectorXcd state(std::string_view label) const;
  std::string describe(std::size_t index) const;

  // Converts between pictures: interaction amplitude = exp(i E0 t) * Schrodinger amplitude.
  Eigen::VectorXcd to_interaction(const Eigen::VectorXcd& schrodinger, double t) const;
  Eigen::VectorXcd to_schrodinger(const Eigen::VectorXcd& interaction, double t) const;

 private:
  DeviceSpec device_;
  BasisIndex basis_;
  OperatorSet ops_;
  HamiltonianTerms terms_;
  LogicalLayout layout_;
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
};

struct AssembledHamiltonian {
  ComplexSparse matrix;
  std::vector<std::string> warnings;
};

AssembledHamiltonian assemble_hamiltonian(const System& system, std::span<const double> detunings,
                                          Picture picture, double t, bool loss = false);

// Labels: "00".."11" (first digit the first ensemble), "0"/"1" on single-qubit
// devices, "eta", "xi", "zeta", "vac", or a named state such as "n(A)=1,m(A')=1,j=2".
BasisState logical_basis_state(const DeviceSpec& device, const LogicalLayout& layout, std::string_view label);
Eigen::VectorXcd logical_state(const System& system, std::string_view label);

std::vector<std::string> logical_labels(const LogicalLayout& layout);

// Eigenstates of the constant-detuning Hamiltonian continuously connected to
// chosen bare states: largest bare overlap, phase fixed so that overlap is real positive.
struct DressedStates {
  std::vector<std::size_t> bare;
  std::vector<double> energies;
  std::vector<Eigen::VectorXcd> vectors;  // Schrodinger-picture vectors over the full basis
};

DressedStates dressed_states(const System& system, std::span<const double> detunings,
                             const std::vector<std::size_t>& bare);

}  // namespace hybridqc
