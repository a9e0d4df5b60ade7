#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hybridqc/hilbert.hpp"

namespace hybridqc {

enum class PulseShape { step, ramp };

struct Pulse {
  std::string mode;
  double detuning = 0.0;  // rad/ns
  double center = 0.0;    // ns
  double duration = 0.0;  // ns, full width at half height
  PulseShape shape = PulseShape::step;
  double ramp = 0.0;  // edge width of a ramp pulse, ns
  std::string stage;

  double start() const { return center - 0.5 * duration; }
  double end() const { return center + 0.5 * duration; }
  double support_start() const { return shape == PulseShape::ramp ? start() - 0.5 * ramp : start(); }
  double support_end() const { return shape == PulseShape::ramp ? end() + 0.5 * ramp : end(); }
  double value_at(double t) const;
  bool operator==(const Pulse&) const = default;
};

struct PulseSchedule {
  std::vector<Pulse> pulses;
  double duration = 0.0;
  std::vector<std::string> warnings;

  double detuning_at(const std::string& mode, double t) const;
  std::vector<double> detunings_at(const DeviceSpec& device, double t) const;
  // Sorted distinct times in [t0, t1] where the detuning profile has a kink or jump.
  std::vector<double> breakpoints(double t0, double t1) const;
  bool steps_only() const;
  double last_pulse_end() const;

  // Appends `next` after this schedule's full duration.
  PulseSchedule then(const PulseSchedule& next) const;
  bool operator==(const PulseSchedule& o) const { return pulses == o.pulses && duration == o.duration; }
};

double detuning_at(const PulseSchedule& schedule, const std::string& mode, double t);

// Throws on structural problems (unknown mode, non-positive width, ramps that
// are too fast or wider than the pulse); records bound violations as warnings.
void check_schedule(const DeviceSpec& device, PulseSchedule& schedule);

// True when the pulse brings its mode within `ratio` couplings of a coupled
// gap or of a hop partner's frequency at the pulse center.
bool is_resonant_pulse(const DeviceSpec& device, const PulseSchedule& schedule, const Pulse& pulse,
                       double ratio = 10.0);

// Turns every step pulse into a linear ramp. Resonant pulses keep their
// plateau so the exchange time is unchanged; off-resonant pulses keep their area
// (pulses shorter than the ramp become triangles).
PulseSchedule with_ramps(const DeviceSpec& device, const PulseSchedule& schedule, double ramp_time);

// Smallest ramp time satisfying the slowness rule for every pulsed mode.
double minimum_ramp_time(const DeviceSpec& device, const PulseSchedule& schedule);

enum class GateFrame { dressed, bare };
GateFrame parse_frame(std::string_view tag);
std::string to_string(GateFrame frame);

struct RzOptions {
  std::optional<double> detuning;
  bool dispersive_correction = true;
  // Nudge the detuning so the qubit's photon-ensemble splitting completes
  // whole turns during the pulse (needs the dispersive correction).
  bool whole_turns = true;
  std::string stage = "rz";
};

PulseSchedule compile_rz(const System& system, const std::string& qubit, double angle, const RzOptions& options = {});
PulseSchedule compile_ry(const System& system, const std::string& qubit, double angle);

enum class CzVariant { scalable, single_cavity };
CzVariant parse_cz_variant(std::string_view tag);
std::string to_string(CzVariant variant);

struct CzDesign {
  PulseSchedule schedule;
  double offset = 0.0;               // extra detuning of the full-cycle stage, rad/ns
  std::vector<double> delays;        // free-evolution gaps inserted between stages, ns
  double correction = 0.0;           // duration of the phase-correction pulse (single cavity), ns
  double residual = 0.0;             // largest remaining ledger phase error, rad
};

CzDesign design_cz(const System& system, CzVariant variant);
PulseSchedule compile_cz(const System& system, CzVariant variant);

struct LedgerEntry {
  std::string label;
  std::size_t initial = 0;
  std::size_t final = 0;
  double phase = 0.0;       // amplitude on the final state is population^(1/2) * exp(-i phase)
  double population = 0.0;
};

struct PhaseLedger {
  std::vector<LedgerEntry> entries;
  GateFrame frame = GateFrame::dressed;
  const LedgerEntry& at(const std::string& label) const;
  double phase(const std::string& label) const { return at(label).phase; }
};

struct LedgerOptions {
  GateFrame frame = GateFrame::dressed;
  double min_population = 0.99;
};

PhaseLedger phase_ledger(const System& system, const PulseSchedule& schedule, const std::vector<std::string>& labels,
                         const LedgerOptions& options = {});

}  // namespace hybridqc
