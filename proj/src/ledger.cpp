#include <algorithm>
#include <cmath>
#include <map>

#include "hybridqc/dynamics.hpp"
#include "hybridqc/errors.hpp"
#include "hybridqc/pulses.hpp"
#include "hybridqc/units.hpp"

namespace hybridqc {

const LedgerEntry& PhaseLedger::at(const std::string& label) const {
  for (const auto& e : entries)
    if (e.label == label) return e;
  throw ValidationError("no ledger entry for '" + label + "'");
}

namespace {

double wrap(double x) {
  double y = std::remainder(x, units::two_pi);
  if (y <= -units::pi) y += units::two_pi;
  return y;
}

// Spectral decomposition of one excitation sector at fixed detunings.
struct SectorSpectrum {
  std::vector<std::size_t> members;
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;
};

SectorSpectrum sector_spectrum(const System& system, int k, const std::vector<double>& det) {
  SectorSpectrum s;
  const auto& basis = system.basis();
  std::vector<long> position(basis.size(), -1);
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (basis[i].total() == k) {
      position[i] = static_cast<long>(s.members.size());
      s.members.push_back(i);
    }
  const auto n = static_cast<long>(s.members.size());
  const Eigen::VectorXd diag = system.diagonal(det);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (long i = 0; i < n; ++i) h(i, i) = diag(static_cast<long>(s.members[static_cast<std::size_t>(i)]));
  for (const auto* list : {&system.terms().interaction, &system.terms().hopping})
    for (const auto& c : *list) {
      const long r = position[c.row], q = position[c.col];
      if (r < 0 || q < 0) continue;
      h(r, q) += c.value;
      h(q, r) += c.value;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  s.energies = solver.eigenvalues();
  s.vectors = solver.eigenvectors();
  return s;
}

}  // namespace

PhaseLedger phase_ledger(const System& system, const PulseSchedule& schedule, const std::vector<std::string>& labels,
                         const LedgerOptions& options) {
  PhaseLedger ledger;
  ledger.frame = options.frame;
  const auto& device = system.device();
  const double total = schedule.duration;
  const std::vector<double> zero(device.modes.size(), 0.0);

  std::vector<std::size_t> bare;
  for (const auto& label : labels) bare.push_back(system.state_index(label));
  const DressedStates initial = dressed_states(system, zero, bare);

  std::vector<double> cuts = schedule.breakpoints(0.0, total);
  cuts.insert(cuts.begin(), 0.0);
  cuts.push_back(total);
  std::map<int, std::vector<SectorSpectrum>> spectra;  // per sector, one per segment

  for (std::size_t l = 0; l < labels.size(); ++l) {
    Eigen::VectorXcd psi;
    if (options.frame == GateFrame::dressed) psi = initial.vectors[l];
    else psi = system.state(labels[l]);

    if (total > 0.0 && !schedule.steps_only()) {
      PropagationOptions o;
      o.integrator = Integrator::adaptive;
      o.tolerance = 1e-11;
      psi = evolve(system, psi, schedule, o);
    } else if (total > 0.0) {
      const int k = system.basis()[bare[l]].total();
      auto it = spectra.find(k);
      if (it == spectra.end()) {
        std::vector<SectorSpectrum> list;
        for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
          list.push_back(sector_spectrum(system, k, schedule.detunings_at(device, 0.5 * (cuts[s] + cuts[s + 1]))));
        it = spectra.emplace(k, std::move(list)).first;
      }
      const auto& members = it->second.front().members;
      Eigen::VectorXcd local(static_cast<long>(members.size()));
      for (std::size_t i = 0; i < members.size(); ++i) local(static_cast<long>(i)) = psi(static_cast<long>(members[i]));
      for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const auto& sp = it->second[s];
        const double dt = cuts[s + 1] - cuts[s];
        Eigen::VectorXcd coeff = sp.vectors.transpose() * local;
        for (long i = 0; i < coeff.size(); ++i) coeff(i) *= std::polar(1.0, -sp.energies(i) * dt);
        local = sp.vectors * coeff;
      }
      psi.setZero();
      for (std::size_t i = 0; i < members.size(); ++i) psi(static_cast<long>(members[i])) = local(static_cast<long>(i));
    }

    long dominant = 0;
    psi.cwiseAbs2().maxCoeff(&dominant);
    const auto u = static_cast<std::size_t>(dominant);
    complex amplitude;
    double reference;
    if (options.frame == GateFrame::dressed) {
      const DressedStates target = dressed_states(system, zero, {u});
      amplitude = target.vectors[0].dot(psi);
      reference = target.energies[0];
    } else {
      amplitude = psi(dominant);
      reference = system.terms().idle(dominant);
    }
    const double population = std::norm(amplitude);
    if (population < options.min_population)
      throw ValidationError("label '" + labels[l] + "' not expressible as a single basis state after the schedule " +
                            "(largest population " + std::to_string(population) + ")");
    LedgerEntry e;
    e.label = labels[l];
    e.initial = bare[l];
    e.final = u;
    e.population = population;
    e.phase = wrap(-std::arg(amplitude) - reference * total);
    ledger.entries.push_back(e);
  }
  return ledger;
}

}  // namespace hybridqc
