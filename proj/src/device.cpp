#include "hybridqc/device.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "hybridqc/errors.hpp"
#include "hybridqc/units.hpp"

namespace hybridqc {

bool ModeSpec::within_bounds(double detuning) const {
  return std::abs(detuning) <= max_detuning() * (1.0 + 1e-12);
}

const CpbCoupling* CpbSpec::coupling_for(const std::string& mode) const {
  for (const auto& c : couplings)
    if (c.mode == mode) return &c;
  return nullptr;
}

int DeviceSpec::mode_index(const std::string& label) const {
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (modes[i].label == label) return static_cast<int>(i);
  return -1;
}

int DeviceSpec::spin_index(const std::string& label) const {
  for (std::size_t i = 0; i < spins.size(); ++i)
    if (spins[i].label == label) return static_cast<int>(i);
  return -1;
}

const ModeSpec& DeviceSpec::mode(const std::string& label) const {
  int i = mode_index(label);
  if (i < 0) throw ValidationError("unknown mode '" + label + "'");
  return modes[static_cast<std::size_t>(i)];
}

const SpinEnsembleSpec& DeviceSpec::spin(const std::string& label) const {
  int i = spin_index(label);
  if (i < 0) throw ValidationError("unknown spin ensemble '" + label + "'");
  return spins[static_cast<std::size_t>(i)];
}

double DeviceSpec::loss_rate(const std::string& mode) const {
  auto it = loss.find(mode);
  return it == loss.end() ? 0.0 : it->second;
}

bool DeviceSpec::has_loss() const {
  return std::any_of(loss.begin(), loss.end(), [](const auto& kv) { return kv.second > 0.0; });
}

CpbLevels cpb_spectrum_raw(double ec, double ej, double ng, int nmax) {
  if (nmax < 3) throw ValidationError("charge cutoff must be at least 3, got " + std::to_string(nmax));
  if (!(ec > 0.0)) throw ValidationError("charging energy must be positive");
  if (!(ej >= 0.0)) throw ValidationError("Josephson energy must be non-negative");
  const int dim = 2 * nmax + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double n = i - nmax;
    h(i, i) = 4.0 * ec * (n - ng) * (n - ng);
    if (i + 1 < dim) h(i, i + 1) = h(i + 1, i) = -0.5 * ej;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw NumericError("charge-basis diagonalization failed");
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  Eigen::VectorXd charge(dim);
  for (int i = 0; i < dim; ++i) charge(i) = i - nmax;

  CpbLevels out;
  for (int j = 0; j < 3; ++j) out.energies[static_cast<std::size_t>(j)] = values(j);
  out.gap01 = values(1) - values(0);
  out.gap12 = values(2) - values(1);
  for (int j = 0; j < 2; ++j)
    out.charge_elements[static_cast<std::size_t>(j)] =
        std::abs(vectors.col(j).dot(charge.cwiseProduct(vectors.col(j + 1))));
  return out;
}

CpbLevels cpb_spectrum(double ec, double ej, double ng, int nmax) {
  CpbLevels coarse = cpb_spectrum_raw(ec, ej, ng, nmax);
  CpbLevels fine = cpb_spectrum_raw(ec, ej, ng, 2 * nmax);
  auto check = [&](double a, double b, const char* name) {
    const double scale = std::max(std::abs(b), ec);
    if (std::abs(a - b) > 1e-10 * scale) {
      std::ostringstream msg;
      msg << "box spectrum not converged at charge cutoff " << nmax << ": " << name << " changes by "
          << std::abs(a - b) / scale << " (relative) when the cutoff is doubled";
      throw NumericError(msg.str(), std::abs(a - b) / scale);
    }
  };
  check(coarse.gap01, fine.gap01, "gap01");
  check(coarse.gap12, fine.gap12, "gap12");
  return coarse;
}

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(),
                                                [](const Finding& f) { return f.severity == Severity::error; }));
}

std::size_t ValidationReport::warning_count() const { return findings.size() - error_count(); }

std::vector<Finding> ValidationReport::errors() const {
  std::vector<Finding> out;
  std::copy_if(findings.begin(), findings.end(), std::back_inserter(out),
               [](const Finding& f) { return f.severity == Severity::error; });
  return out;
}

std::vector<Finding> ValidationReport::warnings() const {
  std::vector<Finding> out;
  std::copy_if(findings.begin(), findings.end(), std::back_inserter(out),
               [](const Finding& f) { return f.severity == Severity::warning; });
  return out;
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& f : findings)
    out << (f.severity == Severity::error ? "error" : "warning") << " [" << f.code << "] " << f.subject
        << ": " << f.message << "\n";
  return out.str();
}

namespace {

constexpr double kRatio = 10.0;

std::string ghz_text(double w) {
  std::ostringstream s;
  s << units::to_ghz(w) << " GHz";
  return s.str();
}

class Checker {
 public:
  explicit Checker(ValidationReport& report) : report_(report) {}
  void error(std::string code, std::string subject, std::string message) {
    report_.findings.push_back({Severity::error, std::move(code), std::move(subject), std::move(message)});
  }
  void warning(std::string code, std::string subject, std::string message) {
    report_.findings.push_back({Severity::warning, std::move(code), std::move(subject), std::move(message)});
  }
  void detuning(const std::string& code, const std::string& subject, double a, double b, double coupling,
                const std::string& what) {
    if (!(coupling > 0.0)) return;
    const double ratio = std::abs(a - b) / coupling;
    if (ratio < kRatio) {
      std::ostringstream msg;
      msg << what << ": detuning " << ghz_text(std::abs(a - b)) << " is only " << ratio
          << " times the coupling";
      warning(code, subject, msg.str());
    }
  }

 private:
  ValidationReport& report_;
};

}  // namespace

ValidationReport validate_device(const DeviceSpec& d) {
  ValidationReport report;
  Checker c(report);

  if (d.modes.empty()) c.error("no-modes", d.name, "no modes defined");

  std::set<std::string> labels;
  auto claim = [&](const std::string& label, const char* kind) {
    if (label.empty()) c.error("empty-label", kind, "empty label");
    else if (!labels.insert(std::string(kind) + ":" + label).second)
      c.error("duplicate-label", label, std::string("duplicate ") + kind + " label");
  };
  for (const auto& m : d.modes) claim(m.label, "mode");
  for (const auto& s : d.spins) claim(s.label, "spin");

  for (const auto& m : d.modes) {
    if (!(m.fundamental > 0.0)) c.error("bad-frequency", m.label, "fundamental frequency must be positive");
    if (m.harmonic < 1) c.error("bad-harmonic", m.label, "harmonic index must be at least 1");
    if (!(m.tuning_range > 0.0 && m.tuning_range < 1.0))
      c.error("bad-range", m.label, "tuning range must lie in (0, 1)");
  }

  for (const auto& s : d.spins) {
    if (!(s.gap > 0.0)) c.error("bad-gap", s.label, "spin gap must be positive");
    if (!(s.coupling > 0.0)) c.error("bad-coupling", s.label, "collective coupling must be positive");
    if (s.spin_count && s.single_spin_coupling) {
      const double expected = std::sqrt(*s.spin_count) * *s.single_spin_coupling;
      if (!(s.coupling > 0.0) || std::abs(s.coupling - expected) / s.coupling >= 1e-12)
        c.error("coupling-mismatch", s.label, "collective coupling differs from sqrt(count) * single coupling");
    } else if (s.spin_count.has_value() != s.single_spin_coupling.has_value()) {
      c.error("coupling-mismatch", s.label, "spin count and single-spin coupling must be given together");
    }
    if (d.mode_index(s.mode) < 0) c.error("unknown-mode", s.label, "coupled mode '" + s.mode + "' does not exist");
  }

  if (d.cpb) {
    const auto& b = *d.cpb;
    if (!(b.gap01 > 0.0) || !(b.gap12 > 0.0)) c.error("bad-gap", b.label, "box gaps must be positive");
    std::set<std::string> seen;
    double gmax = 0.0;
    for (const auto& cp : b.couplings) {
      if (d.mode_index(cp.mode) < 0) c.error("unknown-mode", b.label, "coupled mode '" + cp.mode + "' does not exist");
      if (!seen.insert(cp.mode).second) c.error("duplicate-coupling", b.label, "mode '" + cp.mode + "' coupled twice");
      if (cp.lower < 0.0 || cp.upper < 0.0) c.error("bad-coupling", b.label, "couplings must be non-negative");
      gmax = std::max({gmax, cp.lower, cp.upper});
    }
    if (gmax > 0.0 && std::abs(b.gap01 - b.gap12) < kRatio * gmax) {
      std::ostringstream msg;
      msg << "anharmonicity " << ghz_text(std::abs(b.gap01 - b.gap12)) << " is below 10 times the largest coupling";
      c.warning("weak-anharmonicity", b.label, msg.str());
    }
  }

  for (const auto& h : d.hops) {
    const std::string subject = h.first + "-" + h.second;
    if (d.mode_index(h.first) < 0 || d.mode_index(h.second) < 0)
      c.error("unknown-mode", subject, "hop references an unknown mode");
    else if (h.first == h.second)
      c.error("self-hop", subject, "hop must join two different modes");
    if (!(h.rate > 0.0)) c.error("bad-rate", subject, "hopping rate must be positive");
  }
  for (std::size_t i = 0; i < d.hops.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const auto &a = d.hops[i], &b = d.hops[j];
      if ((a.first == b.first && a.second == b.second) || (a.first == b.second && a.second == b.first))
        c.error("duplicate-hop", a.first + "-" + a.second, "hop listed twice");
    }

  for (const auto& [mode, rate] : d.loss) {
    if (d.mode_index(mode) < 0) c.error("unknown-mode", mode, "loss references an unknown mode");
    if (!(rate >= 0.0)) c.error("bad-loss", mode, "loss rate must be non-negative");
  }

  if (report.error_count() > 0) return report;

  // Idle-regime ratios only make sense on a structurally sound device.
  for (const auto& s : d.spins)
    c.detuning("idle-resonance", s.label, d.mode(s.mode).idle_frequency(), s.gap, s.coupling,
               "idle resonance with mode " + s.mode);
  if (d.cpb) {
    for (const auto& cp : d.cpb->couplings) {
      const double w = d.mode(cp.mode).idle_frequency();
      c.detuning("idle-resonance", d.cpb->label, w, d.cpb->gap01, cp.lower,
                 "idle resonance of mode " + cp.mode + " with the lower transition");
      c.detuning("idle-resonance", d.cpb->label, w, d.cpb->gap12, cp.upper,
                 "idle resonance of mode " + cp.mode + " with the upper transition");
    }
  }
  for (const auto& h : d.hops)
    c.detuning("idle-resonance", h.first + "-" + h.second, d.mode(h.first).idle_frequency(),
               d.mode(h.second).idle_frequency(), h.rate, "idle resonance between hopping modes");
  return report;
}

void require_valid(const DeviceSpec& device) {
  auto report = validate_device(device);
  if (!report.ok()) throw ValidationError("device '" + device.name + "' is invalid:\n" + report.summary());
}

}  // namespace hybridqc
