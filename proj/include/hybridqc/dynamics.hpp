#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hybridqc/hilbert.hpp"
#include "hybridqc/pulses.hpp"

namespace hybridqc {

enum class Integrator { piecewise_exact, adaptive };

Integrator parse_integrator(std::string_view tag);
std::string to_string(Integrator integrator);

struct PropagationOptions {
  Picture picture = Picture::schrodinger;
  Integrator integrator = Integrator::piecewise_exact;
  double tolerance = 1e-10;
  double grid = 0.05;  // ns between stored points
  bool loss = false;

  void validate(const PulseSchedule& schedule) const;
};

struct Trajectory {
  Picture picture = Picture::schrodinger;
  bool lossy = false;
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> states;
  std::vector<double> norm2;
  std::vector<std::string> annotations;

  const Eigen::VectorXcd& final_state() const { return states.back(); }
  double final_time() const { return times.back(); }
};

struct TimeSpan {
  double start = 0.0;
  double end = 0.0;
};

// The initial state is given in the requested picture at span.start, and so
// are the stored states.
Trajectory propagate(const System& system, const Eigen::VectorXcd& initial, const PulseSchedule& schedule,
                     TimeSpan span, const PropagationOptions& options = {});

// Non-Hermitian evolution with the device loss rates switched on.
Trajectory propagate_lossy(const System& system, const Eigen::VectorXcd& initial, const PulseSchedule& schedule,
                           TimeSpan span, PropagationOptions options = {});

// Final state only, over [0, schedule.duration].
Eigen::VectorXcd evolve(const System& system, const Eigen::VectorXcd& initial, const PulseSchedule& schedule,
                        const PropagationOptions& options = {});

// Dense reference propagator in the Schrodinger picture, independent of the
// production integrators.
Eigen::VectorXcd oracle_propagate(const System& system, const Eigen::VectorXcd& initial,
                                  const PulseSchedule& schedule, TimeSpan span, bool loss = false);

inline constexpr std::size_t oracle_dimension_limit = 200;

}  // namespace hybridqc
