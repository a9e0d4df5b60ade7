#include "hybridqc/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "hybridqc/errors.hpp"
#include "hybridqc/units.hpp"
#include "exchange.hpp"

namespace hybridqc {

double Pulse::value_at(double t) const {
  if (shape == PulseShape::step) return (t >= start() && t < end()) ? detuning : 0.0;
  const double rise0 = start() - 0.5 * ramp, rise1 = start() + 0.5 * ramp;
  const double fall0 = end() - 0.5 * ramp, fall1 = end() + 0.5 * ramp;
  if (t < rise0 || t >= fall1) return 0.0;
  if (t < rise1) return detuning * (t - rise0) / ramp;
  if (t < fall0) return detuning;
  return detuning * (fall1 - t) / ramp;
}

double PulseSchedule::detuning_at(const std::string& mode, double t) const {
  double total = 0.0;
  for (const auto& p : pulses)
    if (p.mode == mode) total += p.value_at(t);
  return total;
}

double detuning_at(const PulseSchedule& schedule, const std::string& mode, double t) {
  return schedule.detuning_at(mode, t);
}

std::vector<double> PulseSchedule::detunings_at(const DeviceSpec& device, double t) const {
  std::vector<double> out(device.modes.size(), 0.0);
  for (const auto& p : pulses) {
    const int m = device.mode_index(p.mode);
    if (m < 0) throw ValidationError("pulse on unknown mode '" + p.mode + "'");
    out[static_cast<std::size_t>(m)] += p.value_at(t);
  }
  return out;
}

std::vector<double> PulseSchedule::breakpoints(double t0, double t1) const {
  std::vector<double> all;
  for (const auto& p : pulses) {
    if (p.shape == PulseShape::step) {
      all.push_back(p.start());
      all.push_back(p.end());
    } else {
      all.insert(all.end(), {p.start() - 0.5 * p.ramp, p.start() + 0.5 * p.ramp, p.end() - 0.5 * p.ramp,
                             p.end() + 0.5 * p.ramp});
    }
  }
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double t : all) {
    if (t <= t0 + 1e-12 || t >= t1 - 1e-12) continue;
    if (out.empty() || t - out.back() > 1e-12) out.push_back(t);
  }
  return out;
}

bool PulseSchedule::steps_only() const {
  return std::all_of(pulses.begin(), pulses.end(), [](const Pulse& p) { return p.shape == PulseShape::step; });
}

double PulseSchedule::last_pulse_end() const {
  double end = 0.0;
  for (const auto& p : pulses) end = std::max(end, p.support_end());
  return end;
}

PulseSchedule PulseSchedule::then(const PulseSchedule& next) const {
  PulseSchedule out = *this;
  for (Pulse p : next.pulses) {
    p.center += duration;
    out.pulses.push_back(std::move(p));
  }
  out.duration = duration + next.duration;
  out.warnings.insert(out.warnings.end(), next.warnings.begin(), next.warnings.end());
  return out;
}

void check_schedule(const DeviceSpec& device, PulseSchedule& schedule) {
  for (const auto& p : schedule.pulses) {
    const int m = device.mode_index(p.mode);
    if (m < 0) throw ValidationError("pulse on unknown mode '" + p.mode + "'");
    if (!(p.duration > 0.0)) throw ValidationError("pulse on mode " + p.mode + " must have positive duration");
    if (p.shape == PulseShape::ramp) {
      const double w = device.modes[static_cast<std::size_t>(m)].idle_frequency();
      if (!(p.ramp > 0.0) || p.ramp * w < 50.0 * (1.0 - 1e-12))
        throw ValidationError("ramp on mode " + p.mode + " is too fast: ramp time times idle frequency must be >= 50");
      if (p.ramp > p.duration) throw ValidationError("ramp on mode " + p.mode + " is wider than the pulse");
    }
  }
  if (schedule.duration < schedule.last_pulse_end() - 1e-9)
    throw ValidationError("schedule duration ends before its last pulse");
  // The profile is piecewise linear, so extremes sit on breakpoints.
  std::vector<double> probes = schedule.breakpoints(-1e300, 1e300);
  std::vector<double> samples;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    samples.push_back(probes[i]);
    if (i + 1 < probes.size()) samples.push_back(0.5 * (probes[i] + probes[i + 1]));
  }
  for (const auto& mode : device.modes) {
    double worst = 0.0;
    for (double t : samples) worst = std::max(worst, std::abs(schedule.detuning_at(mode.label, t)));
    if (!mode.within_bounds(worst)) {
      std::ostringstream msg;
      msg << "mode " << mode.label << " is detuned by " << units::to_ghz(worst) << " GHz, beyond its bound of "
          << units::to_ghz(mode.max_detuning()) << " GHz";
      if (std::find(schedule.warnings.begin(), schedule.warnings.end(), msg.str()) == schedule.warnings.end())
        schedule.warnings.push_back(msg.str());
    }
  }
}

namespace {

struct Window {
  double center;
  double halfwidth;
  std::string what;
  double rabi = 0.0;     // full exchange rate with this partner
  std::string partner;   // hop partner mode, empty for fixed transitions
};

// Frequencies a mode should stay away from when it must not exchange energy.
std::vector<Window> resonance_windows(const DeviceSpec& device, const std::string& mode,
                                      const std::map<std::string, double>& partner_frequency, double ratio) {
  std::vector<Window> out;
  for (const auto& s : device.spins)
    if (s.mode == mode) out.push_back({s.gap, ratio * s.coupling, "ensemble " + s.label, s.coupling, ""});
  if (device.cpb)
    if (const auto* c = device.cpb->coupling_for(mode)) {
      if (c->lower > 0.0) out.push_back({device.cpb->gap01, ratio * c->lower, "box lower transition", c->lower, ""});
      if (c->upper > 0.0) out.push_back({device.cpb->gap12, ratio * c->upper, "box upper transition", c->upper, ""});
    }
  for (const auto& h : device.hops) {
    std::string other;
    if (h.first == mode) other = h.second;
    else if (h.second == mode) other = h.first;
    else continue;
    auto it = partner_frequency.find(other);
    const double w = it != partner_frequency.end() ? it->second : device.mode(other).idle_frequency();
    out.push_back({w, ratio * h.rate, "mode " + other, 2.0 * h.rate, other});
  }
  return out;
}

std::string feasible_text(const ModeSpec& mode, const std::vector<Window>& windows) {
  const double w0 = mode.idle_frequency(), b = mode.max_detuning();
  std::vector<std::pair<double, double>> free{{-b, b}};
  for (const auto& win : windows) {
    std::vector<std::pair<double, double>> next;
    const double lo = win.center - win.halfwidth - w0, hi = win.center + win.halfwidth - w0;
    for (auto [a, c] : free) {
      if (hi <= a || lo >= c) {
        next.emplace_back(a, c);
        continue;
      }
      if (lo > a) next.emplace_back(a, lo);
      if (hi < c) next.emplace_back(hi, c);
    }
    free = std::move(next);
  }
  std::ostringstream out;
  out << "feasible detunings for mode " << mode.label << " (GHz):";
  if (free.empty()) out << " none";
  for (auto [a, c] : free) out << " [" << units::to_ghz(a) << ", " << units::to_ghz(c) << "]";
  return out.str();
}

std::size_t qubit_spin(const System& system, const std::string& qubit) {
  const int e = system.device().spin_index(qubit);
  if (e < 0) throw ValidationError("unknown qubit '" + qubit + "'");
  const auto& layout = system.layout();
  for (std::size_t q = 0; q < layout.qubits; ++q)
    if (layout.spin[q] == static_cast<std::size_t>(e)) return q;
  throw ValidationError("ensemble '" + qubit + "' does not carry a qubit");
}

std::pair<std::string, std::string> qubit_labels(const System& system, std::size_t q) {
  if (system.layout().qubits == 1) return {"0", "1"};
  return q == 0 ? std::pair<std::string, std::string>{"00", "10"} : std::pair<std::string, std::string>{"00", "01"};
}

}  // namespace

namespace detail {

namespace {

// Second-order shift of one photon in `mode` from every partner other than
// `skip`, with the box in its ground level.
double photon_shift(const DeviceSpec& device, const std::map<std::string, double>& frequency,
                    const std::string& mode, const std::string& skip) {
  double shift = 0.0;
  for (const auto& win : resonance_windows(device, mode, frequency, 10.0)) {
    if (win.what == skip || win.what == "box upper transition") continue;
    shift += 0.25 * win.rabi * win.rabi / (frequency.at(mode) - win.center);
  }
  return shift;
}

}  // namespace

double pair_shift(const DeviceSpec& device, const std::map<std::string, double>& frequency, const std::string& mode,
                  const std::string& partner, const std::string& partner_mode) {
  if (partner == "box upper transition") return 0.0;
  double shift = photon_shift(device, frequency, mode, partner);
  if (!partner_mode.empty()) shift -= photon_shift(device, frequency, partner_mode, "mode " + mode);
  if (partner == "box lower transition")
    for (const auto& c : device.cpb->couplings)
      if (c.mode != mode && c.lower > 0.0)
        shift -= 0.25 * c.lower * c.lower / (device.cpb->gap01 - frequency.at(c.mode));
  return shift;
}

}  // namespace detail

namespace {

std::optional<Window> resonance_of(const DeviceSpec& device, const PulseSchedule& schedule, const Pulse& pulse,
                                   double ratio) {
  std::map<std::string, double> partner;
  for (const auto& m : device.modes)
    partner[m.label] = m.idle_frequency() + schedule.detuning_at(m.label, pulse.center);
  const double w = device.mode(pulse.mode).idle_frequency() + schedule.detuning_at(pulse.mode, pulse.center);
  std::optional<Window> best;
  for (const auto& win : resonance_windows(device, pulse.mode, partner, ratio))
    if (std::abs(w - win.center) < win.halfwidth &&
        (!best || std::abs(w - win.center) / win.halfwidth < std::abs(w - best->center) / best->halfwidth))
      best = win;
  return best;
}

}  // namespace

bool is_resonant_pulse(const DeviceSpec& device, const PulseSchedule& schedule, const Pulse& pulse, double ratio) {
  return resonance_of(device, schedule, pulse, ratio).has_value();
}

double minimum_ramp_time(const DeviceSpec& device, const PulseSchedule& schedule) {
  double r = 0.0;
  for (const auto& p : schedule.pulses) r = std::max(r, 50.0 / device.mode(p.mode).idle_frequency());
  return r;
}

PulseSchedule with_ramps(const DeviceSpec& device, const PulseSchedule& schedule, double ramp_time) {
  if (!schedule.steps_only()) throw ValidationError("schedule already contains ramps");
  if (!(ramp_time > 0.0)) throw ValidationError("ramp time must be positive");
  std::vector<std::size_t> order(schedule.pulses.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return schedule.pulses[a].start() < schedule.pulses[b].start(); });

  PulseSchedule out;
  out.warnings = schedule.warnings;
  out.pulses.resize(schedule.pulses.size());
  double shift = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    // Pulses sharing a start time form one slot and stretch together.
    const double slot_start = schedule.pulses[order[i]].start();
    std::size_t j = i;
    while (j < order.size() && std::abs(schedule.pulses[order[j]].start() - slot_start) < 1e-9) ++j;

    std::map<std::string, double> slot_detuning;
    for (std::size_t k = i; k < j; ++k) slot_detuning[schedule.pulses[order[k]].mode] += schedule.pulses[order[k]].detuning;
    std::map<std::string, double> plateau;  // resolved plateau per resonant mode
    std::map<std::string, double> trim;     // detuning change per mode
    for (std::size_t k = i; k < j; ++k) {
      const Pulse& p = schedule.pulses[order[k]];
      if (plateau.count(p.mode)) continue;
      const auto win = resonance_of(device, schedule, p, 10.0);
      if (!win) continue;
      // Frequency mismatch of the exchanging pair with the slot's pulses off and on.
      const double w0 = device.mode(p.mode).idle_frequency() + schedule.detuning_at(p.mode, p.center) -
                        slot_detuning[p.mode];
      const double idle = w0 - (win->partner.empty() ? win->center : win->center - slot_detuning[win->partner]);
      const double top = device.mode(p.mode).idle_frequency() + schedule.detuning_at(p.mode, p.center) - win->center;
      // Spectator shifts of the photon (and of a hop partner's photon) enter
      // the pair mismatch.
      std::map<std::string, double> on, off;
      for (const auto& m : device.modes) {
        on[m.label] = m.idle_frequency() + schedule.detuning_at(m.label, p.center);
        off[m.label] = on[m.label] - (slot_detuning.count(m.label) ? slot_detuning[m.label] : 0.0);
      }
      auto spectators = [&](const std::map<std::string, double>& f) {
        return detail::pair_shift(device, f, p.mode, win->what, win->partner);
      };
      const double top_shift = spectators(on);
      const detail::Resolved value =
          detail::resolve_ramped(idle + spectators(off), top + top_shift, win->rabi, p.duration, ramp_time);
      plateau[p.mode] = value.plateau;
      const double change = value.top - top - top_shift;
      if (!win->partner.empty() && slot_detuning.count(win->partner)) {
        // Split the trim across both modes of a hopping pair.
        plateau[win->partner] = value.plateau;
        trim[p.mode] = 0.5 * change;
        trim[win->partner] = -0.5 * change;
      } else {
        trim[p.mode] = change;
      }
    }

    double growth = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      const Pulse& p = schedule.pulses[order[k]];
      Pulse q = p;
      q.shape = PulseShape::ramp;
      q.ramp = ramp_time;
      if (auto it = plateau.find(p.mode); it != plateau.end()) q.duration = it->second + ramp_time;
      if (auto it = trim.find(p.mode); it != trim.end()) q.detuning += it->second;
      if (!plateau.count(p.mode) && q.duration < ramp_time) {
        // Too short for a plateau: a triangle with the same area.
        q.detuning *= q.duration / ramp_time;
        q.duration = ramp_time;
      }
      q.center = slot_start + shift + 0.5 * (q.duration + ramp_time);
      growth = std::max(growth, q.duration + ramp_time - p.duration);
      out.pulses[order[k]] = q;
    }
    shift += growth;
    i = j;
  }
  out.duration = schedule.duration + shift;
  check_schedule(device, out);
  return out;
}

GateFrame parse_frame(std::string_view tag) {
  if (tag == "dressed") return GateFrame::dressed;
  if (tag == "bare") return GateFrame::bare;
  throw ValidationError("unknown frame '" + std::string(tag) + "' (expected dressed or bare)");
}

std::string to_string(GateFrame frame) { return frame == GateFrame::dressed ? "dressed" : "bare"; }

CzVariant parse_cz_variant(std::string_view tag) {
  if (tag == "scalable") return CzVariant::scalable;
  if (tag == "single-cavity" || tag == "single") return CzVariant::single_cavity;
  throw ValidationError("unknown CZ variant '" + std::string(tag) + "' (expected scalable or single-cavity)");
}

std::string to_string(CzVariant variant) { return variant == CzVariant::scalable ? "scalable" : "single-cavity"; }

PulseSchedule compile_rz(const System& system, const std::string& qubit, double angle, const RzOptions& options) {
  const auto& device = system.device();
  const std::size_t q = qubit_spin(system, qubit);
  const auto& mode = device.modes[system.layout().mode[q]];
  PulseSchedule out;
  double phi = std::fmod(angle, units::two_pi);
  if (phi < 0.0) phi += units::two_pi;
  if (phi < 1e-15 || units::two_pi - phi < 1e-15) return out;

  const double bound = mode.max_detuning();
  const double delta = options.detuning.value_or(0.5 * bound);
  const auto windows = resonance_windows(device, mode.label, {}, 10.0);
  if (!mode.within_bounds(delta) || delta == 0.0) {
    std::ostringstream msg;
    msg << "detuning " << units::to_ghz(delta) << " GHz is not usable for a phase gate; " << feasible_text(mode, windows);
    throw ValidationError(msg.str());
  }
  for (const auto& w : windows)
    if (std::abs(mode.idle_frequency() + delta - w.center) < w.halfwidth) {
      std::ostringstream msg;
      msg << "detuning " << units::to_ghz(delta) << " GHz brings mode " << mode.label << " into resonance with "
          << w.what << "; " << feasible_text(mode, windows);
      throw ValidationError(msg.str());
    }

  if (!options.dispersive_correction) {
    // Bare rule: the detuning itself is the phase rate.
    const double area = delta > 0.0 ? units::two_pi - phi : phi;
    const double tau = area / std::abs(delta);
    out.pulses.push_back({mode.label, delta, 0.5 * tau, tau, PulseShape::step, 0.0, options.stage});
    out.duration = tau;
    check_schedule(device, out);
    return out;
  }

  const auto [zero, one] = qubit_labels(system, q);
  const std::vector<std::size_t> bare{system.state_index(zero), system.state_index(one)};
  std::vector<double> det(device.modes.size(), 0.0);
  const auto idle = dressed_states(system, det, bare);
  const double idle_split = idle.energies[1] - idle.energies[0];
  // Phase rate and pulse length at a trial detuning, plus the number of turns
  // the photon-ensemble splitting makes during the pulse.
  struct Trial {
    double rate, tau, turns;
  };
  auto trial = [&](double d) {
    det[system.layout().mode[q]] = d;
    const auto shifted = dressed_states(system, det, bare);
    const double split = shifted.energies[1] - shifted.energies[0];
    const double rate = split - idle_split;
    // A pulse of area A multiplies the one-photon component by exp(-iA).
    const double area = rate > 0.0 ? units::two_pi - phi : phi;
    const double tau = area / std::abs(rate);
    return Trial{rate, tau, std::abs(split) * tau / units::two_pi};
  };

  double chosen = delta;
  Trial t = trial(delta);
  if (options.whole_turns) {
    // Switching the mode suddenly mixes photon and ensemble slightly; the
    // mixing undoes itself when the splitting completes whole turns, so the
    // detuning is nudged to the nearest such point.
    const double target = std::max(1.0, std::round(t.turns));
    double a = delta, fa = t.turns - target;
    double b = delta * (1.0 + 1e-3), fb = trial(b).turns - target;
    bool converged = std::abs(fa) < 1e-12;
    for (int it = 0; it < 60 && !converged && fb != fa; ++it) {
      const double c = b - fb * (b - a) / (fb - fa);
      a = b;
      fa = fb;
      b = c;
      fb = trial(b).turns - target;
      converged = std::abs(fb) < 1e-11;
    }
    const bool usable = converged && std::abs(b - delta) <= 0.25 * std::abs(delta) && mode.within_bounds(b) &&
                        std::none_of(windows.begin(), windows.end(), [&](const Window& w) {
                          return std::abs(mode.idle_frequency() + b - w.center) < w.halfwidth;
                        });
    if (usable) {
      chosen = b;
      t = trial(b);
    }
  }
  out.pulses.push_back({mode.label, chosen, 0.5 * t.tau, t.tau, PulseShape::step, 0.0, options.stage});
  out.duration = t.tau;
  check_schedule(device, out);
  return out;
}

PulseSchedule compile_ry(const System& system, const std::string& qubit, double angle) {
  const auto& device = system.device();
  const std::size_t q = qubit_spin(system, qubit);
  const auto& spin = device.spins[system.layout().spin[q]];
  const auto& mode = device.modes[system.layout().mode[q]];
  if (!(angle >= 0.0 && angle <= units::two_pi * (1.0 + 1e-15)))
    throw ValidationError("rotation angle must lie in [0, 2 pi]");
  PulseSchedule out;
  if (angle == 0.0) return out;
  const double delta = spin.gap - mode.idle_frequency();
  if (!mode.within_bounds(delta)) {
    std::ostringstream msg;
    msg << "resonance of mode " << mode.label << " with ensemble " << spin.label << " needs "
        << units::to_ghz(delta) << " GHz, beyond the bound of " << units::to_ghz(mode.max_detuning()) << " GHz";
    throw ValidationError(msg.str());
  }
  // Full transfers and returns get a small trim so they act exactly on the
  // idle eigenstates of the spin-photon pair. The photon's shift from its
  // other partners enters the pair mismatch.
  double tau = angle / spin.coupling, detuning = delta;
  const bool half = std::abs(angle - units::pi) < 1e-12, full = std::abs(angle - units::two_pi) < 1e-12;
  if (half || full) {
    const std::string partner = "ensemble " + spin.label;
    std::map<std::string, double> f;
    for (const auto& m : device.modes) f[m.label] = m.idle_frequency();
    const double idle_shift = detail::pair_shift(device, f, mode.label, partner, "");
    f[mode.label] = spin.gap;
    const double top_shift = detail::pair_shift(device, f, mode.label, partner, "");
    const auto trimmed = detail::resolve_step(mode.idle_frequency() + idle_shift - spin.gap, top_shift, spin.coupling, tau,
                                              half ? detail::Goal::transfer : detail::Goal::restore);
    tau = trimmed.plateau;
    detuning = delta + trimmed.top - top_shift;
  }
  out.pulses.push_back({mode.label, detuning, 0.5 * tau, tau, PulseShape::step, 0.0, "ry"});
  out.duration = tau;
  RzOptions phase;
  phase.detuning = (spin.gap < mode.idle_frequency() ? 0.5 : -0.5) * mode.max_detuning();
  phase.stage = "ry-phase";
  return out.then(compile_rz(system, qubit, detuning * tau, phase));
}

}  // namespace hybridqc
