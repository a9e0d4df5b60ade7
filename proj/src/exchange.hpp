#pragma once

#include <map>
#include <string>

#include "hybridqc/device.hpp"

// Two-level model of one exchanging pair (photon against an ensemble, a box
// transition or a hop partner), used to size resonant pulses.
namespace hybridqc::detail {

struct Resolved {
  double plateau;
  double top;  // pair mismatch on the plateau, rad/ns
};

enum class Goal { detect, transfer, restore };

// `idle` and `top` are the pair mismatch with the pulse off and on, `rabi`
// the full exchange rate. Complete transfers and complete returns are
// trimmed in plateau and mismatch so they act exactly between the idle
// eigenstates of the pair; other rotations are returned unchanged. `goal`
// states the intent when the caller knows it.
Resolved resolve_step(double idle, double top, double rabi, double duration, Goal goal = Goal::detect);

// Same for a pulse with linear edges of width `ramp`, starting from the step
// pulse (duration, top). Partial rotations keep the step pulse's transfer
// oscillation phase.
Resolved resolve_ramped(double idle, double top, double rabi, double duration, double ramp);

// Shift of the mismatch between a photon in `mode` and its exchange
// `partner` (a resonance window name such as "ensemble A", "mode B" or "box
// lower transition"; `partner_mode` names the mode for a hop) from all
// other couplings, to second order, with modes at `frequency`. Exchanges on
// the box upper transition are not corrected.
double pair_shift(const DeviceSpec& device, const std::map<std::string, double>& frequency, const std::string& mode,
                  const std::string& partner, const std::string& partner_mode);

}  // namespace hybridqc::detail
