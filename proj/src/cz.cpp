#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "hybridqc/errors.hpp"
#include "hybridqc/pulses.hpp"
#include "hybridqc/units.hpp"
#include "exchange.hpp"

namespace hybridqc {

namespace {

using Vec3 = Eigen::Vector3d;
using Builder = std::function<PulseSchedule(const Vec3&)>;

double hop_rate(const DeviceSpec& d, const std::string& a, const std::string& b) {
  for (const auto& h : d.hops)
    if ((h.first == a && h.second == b) || (h.first == b && h.second == a)) return h.rate;
  throw ValidationError("no hop between modes " + a + " and " + b);
}

// Detunings putting two hop partners on a common frequency.
std::pair<double, double> bridge(const ModeSpec& qubit, const ModeSpec& bus, const std::string& stage) {
  const double gap = bus.idle_frequency() - qubit.idle_frequency();
  if (qubit.within_bounds(gap)) return {gap, 0.0};
  if (qubit.within_bounds(0.5 * gap) && bus.within_bounds(-0.5 * gap)) return {0.5 * gap, -0.5 * gap};
  std::ostringstream msg;
  msg << stage << ": bringing modes " << qubit.label << " and " << bus.label << " into resonance needs "
      << units::to_ghz(std::abs(gap)) << " GHz, which no symmetric split fits inside the tuning bounds";
  throw ValidationError(msg.str());
}

double reach(const ModeSpec& mode, double target, const std::string& stage) {
  const double delta = target - mode.idle_frequency();
  if (!mode.within_bounds(delta)) {
    std::ostringstream msg;
    msg << stage << ": mode " << mode.label << " must move by " << units::to_ghz(delta)
        << " GHz, beyond its bound of " << units::to_ghz(mode.max_detuning()) << " GHz";
    throw ValidationError(msg.str());
  }
  return delta;
}

std::map<std::string, double> idle_frequencies(const DeviceSpec& d) {
  std::map<std::string, double> f;
  for (const auto& m : d.modes) f[m.label] = m.idle_frequency();
  return f;
}

// Complete transfer of a photon in `mode` to the box's first level, trimmed
// to act between idle eigenstates. Returns (detuning, duration).
std::pair<double, double> absorption(const DeviceSpec& d, const ModeSpec& mode, double delta, double rabi) {
  auto f = idle_frequencies(d);
  const std::string partner = "box lower transition";
  const double idle = mode.idle_frequency() - d.cpb->gap01 + detail::pair_shift(d, f, mode.label, partner, "");
  f[mode.label] += delta;
  const double shift = detail::pair_shift(d, f, mode.label, partner, "");
  const auto r = detail::resolve_step(idle, shift, rabi, units::pi / rabi, detail::Goal::transfer);
  return {delta + r.top - shift, r.plateau};
}

// Complete transfer between hop partners moved by (dq, db) while every mode
// in `moved` is shifted as well. The trim is split across both modes when
// both move. Returns (qubit detuning, bus detuning, duration).
std::array<double, 3> hop_transfer(const DeviceSpec& d, const ModeSpec& qubit, const ModeSpec& bus, double dq, double db,
                                   double kappa, const std::map<std::string, double>& moved) {
  auto f = idle_frequencies(d);
  const std::string partner = "mode " + bus.label;
  const double idle = qubit.idle_frequency() - bus.idle_frequency() + detail::pair_shift(d, f, qubit.label, partner, bus.label);
  for (const auto& [label, shift] : moved) f[label] += shift;
  const double top = f[qubit.label] - f[bus.label];
  const double shift = detail::pair_shift(d, f, qubit.label, partner, bus.label);
  const auto r = detail::resolve_step(idle, top + shift, 2.0 * kappa, units::pi / (2.0 * kappa), detail::Goal::transfer);
  const double change = r.top - top - shift;
  if (db != 0.0) return {dq + 0.5 * change, db - 0.5 * change, r.plateau};
  return {dq + change, db, r.plateau};
}

void add(PulseSchedule& s, const std::string& mode, double delta, double begin, double width, const char* stage) {
  if (width <= 0.0) return;
  s.pulses.push_back({mode, delta, begin + 0.5 * width, width, PulseShape::step, 0.0, stage});
}

Builder scalable_builder(const System& system) {
  const auto& d = system.device();
  const auto& layout = system.layout();
  if (!d.cpb || layout.qubits != 2 || !layout.bus)
    throw ValidationError("scalable CZ needs two qubits, a box and a hop partner coupled to the box for each qubit");
  const ModeSpec qa = d.modes[layout.mode[0]], qb = d.modes[layout.mode[1]];
  const ModeSpec ba = d.modes[(*layout.bus)[0]], bb = d.modes[(*layout.bus)[1]];
  const double kappa_a = hop_rate(d, qa.label, ba.label), kappa_b = hop_rate(d, qb.label, bb.label);
  const double lower = d.cpb->coupling_for(ba.label)->lower, upper = d.cpb->coupling_for(bb.label)->upper;
  if (!(lower > 0.0) || !(upper > 0.0)) throw ValidationError("scalable CZ needs nonzero box couplings");
  const auto [ba_q, ba_b] = bridge(qa, ba, "stage 1");
  const auto [bb_q, bb_b] = bridge(qb, bb, "stage 1");
  const std::map<std::string, double> moved{{qa.label, ba_q}, {ba.label, ba_b}, {qb.label, bb_q}, {bb.label, bb_b}};
  const auto [sa_q, sa_b, hop_a] = hop_transfer(d, qa, ba, ba_q, ba_b, kappa_a, moved);
  const auto [sb_q, sb_b, hop_b] = hop_transfer(d, qb, bb, bb_q, bb_b, kappa_b, moved);
  const auto [absorb, t_absorb] = absorption(d, ba, reach(ba, d.cpb->gap01, "stage 2"), lower);
  const double cycle = reach(bb, d.cpb->gap12, "stage 3");
  const double hop = std::max(hop_a, hop_b);

  return [=, &d](const Vec3& x) {
    PulseSchedule s;
    double t = 0.0;
    auto hop_stage = [&](const char* stage) {
      add(s, qa.label, sa_q, t, sa_q != 0.0 ? hop_a : 0.0, stage);
      add(s, ba.label, sa_b, t, sa_b != 0.0 ? hop_a : 0.0, stage);
      add(s, qb.label, sb_q, t, sb_q != 0.0 ? hop_b : 0.0, stage);
      add(s, bb.label, sb_b, t, sb_b != 0.0 ? hop_b : 0.0, stage);
      t += hop;
    };
    hop_stage("cz-hop-in");
    t += x(1);
    add(s, ba.label, absorb, t, t_absorb, "cz-absorb");
    t += t_absorb + x(2);
    const double t_cycle = units::two_pi / std::hypot(upper, x(0));
    add(s, bb.label, cycle + x(0), t, t_cycle, "cz-cycle");
    t += t_cycle;
    add(s, ba.label, absorb, t, t_absorb, "cz-release");
    t += t_absorb;
    hop_stage("cz-hop-out");
    s.duration = t;
    check_schedule(d, s);
    return s;
  };
}

Builder single_cavity_builder(const System& system) {
  const auto& d = system.device();
  const auto& layout = system.layout();
  if (!d.cpb || layout.qubits != 2 || !layout.single_cavity)
    throw ValidationError("single-cavity CZ needs two qubit modes both coupled to the box");
  const ModeSpec qa = d.modes[layout.mode[0]], qb = d.modes[layout.mode[1]];
  const double lower = d.cpb->coupling_for(qa.label)->lower, upper = d.cpb->coupling_for(qb.label)->upper;
  if (!(lower > 0.0) || !(upper > 0.0)) throw ValidationError("single-cavity CZ needs nonzero box couplings");
  const auto [absorb, t_absorb] = absorption(d, qa, reach(qa, d.cpb->gap01, "stage 1"), lower);
  const double cycle = reach(qb, d.cpb->gap12, "stage 2");
  const auto& spin_b = d.spins[layout.spin[1]];
  const double shift = (spin_b.gap < qb.idle_frequency() ? 0.5 : -0.5) * qb.max_detuning();

  return [=, &d](const Vec3& x) {
    PulseSchedule s;
    double t = 0.0;
    add(s, qa.label, absorb, t, t_absorb, "cz-absorb");
    t += t_absorb + x(1);
    const double t_cycle = units::two_pi / std::hypot(upper, x(0));
    add(s, qb.label, cycle + x(0), t, t_cycle, "cz-cycle");
    t += t_cycle;
    add(s, qa.label, absorb, t, t_absorb, "cz-release");
    t += t_absorb;
    add(s, qb.label, shift, t, x(2), "cz-phase");
    t += std::max(x(2), 0.0);
    s.duration = t;
    check_schedule(d, s);
    return s;
  };
}

const std::vector<std::string> kLabels{"00", "01", "10", "11"};

Vec3 residual(const System& system, const Builder& build, const Vec3& x) {
  const PhaseLedger ledger = phase_ledger(system, build(x), kLabels);
  auto wrap = [](double v) { return std::remainder(v, units::two_pi); };
  const double ref = ledger.phase("00");
  return {wrap(ledger.phase("01") - ref), wrap(ledger.phase("10") - ref), wrap(ledger.phase("11") - ref - units::pi)};
}

Eigen::Matrix3d jacobian(const System& system, const Builder& build, const Vec3& x, const Vec3& h) {
  Eigen::Matrix3d j;
  for (int c = 0; c < 3; ++c) {
    Vec3 up = x, down = x;
    up(c) += h(c);
    down(c) -= h(c);
    Vec3 diff = residual(system, build, up) - residual(system, build, down);
    for (int r = 0; r < 3; ++r) diff(r) = std::remainder(diff(r), units::two_pi);
    j.col(c) = diff / (2.0 * h(c));
  }
  return j;
}

// Solves for (offset, delay, delay-or-duration) zeroing the three relative phases.
CzDesign solve(const System& system, const Builder& build, double offset_limit) {
  const Vec3 step(1e-5 * offset_limit, 1e-4, 1e-4);
  const Vec3 start = Vec3::Zero();
  const Vec3 f0 = residual(system, build, start);
  const Eigen::Matrix3d j0 = jacobian(system, build, start, step);
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(j0);
  if (!lu.isInvertible()) throw NumericError("CZ phase conditions are degenerate for this device");

  struct Candidate {
    double cost;
    Vec3 x;
  };
  std::vector<Candidate> candidates;
  for (int a = -4; a <= 4; ++a)
    for (int b = -4; b <= 4; ++b)
      for (int c = -1; c <= 1; ++c) {
        const Vec3 target = f0 + units::two_pi * Vec3(a, b, c);
        const Vec3 x = start - lu.solve(target);
        if (x(1) < -1e-6 || x(2) < -1e-6 || std::abs(x(0)) > offset_limit) continue;
        candidates.push_back({x(1) + x(2), x});
      }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& p, const Candidate& q) { return p.cost < q.cost; });

  for (const auto& cand : candidates) {
    Vec3 x = cand.x.cwiseMax(Vec3(-offset_limit, 0.0, 0.0));
    Vec3 f = residual(system, build, x);
    for (int it = 0; it < 40 && f.cwiseAbs().maxCoeff() > 1e-12; ++it) {
      const Eigen::Matrix3d j = jacobian(system, build, x, step);
      x -= j.fullPivLu().solve(f);
      f = residual(system, build, x);
    }
    if (f.cwiseAbs().maxCoeff() > 1e-9) continue;
    if (x(1) < 0.0 || x(2) < 0.0 || std::abs(x(0)) > offset_limit) continue;
    CzDesign design;
    design.schedule = build(x);
    design.offset = x(0);
    design.residual = f.cwiseAbs().maxCoeff();
    design.delays = {x(1), x(2)};
    return design;
  }
  throw NumericError("no delay assignment zeroes the CZ phases");
}

}  // namespace

CzDesign design_cz(const System& system, CzVariant variant) {
  if (system.basis().cap() < 2) throw ValidationError("CZ compilation needs an excitation cap of at least 2");
  const auto& d = system.device();
  if (variant == CzVariant::scalable) {
    const Builder build = scalable_builder(system);
    const double g = d.cpb->coupling_for(d.modes[(*system.layout().bus)[1]].label)->upper;
    return solve(system, build, 0.5 * g);
  }
  const Builder build = single_cavity_builder(system);
  const double g = d.cpb->coupling_for(d.modes[system.layout().mode[1]].label)->upper;
  CzDesign out = solve(system, build, 0.5 * g);
  out.correction = out.delays.back();
  out.delays.pop_back();
  return out;
}

PulseSchedule compile_cz(const System& system, CzVariant variant) { return design_cz(system, variant).schedule; }

}  // namespace hybridqc
