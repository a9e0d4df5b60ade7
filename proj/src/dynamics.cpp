#include "hybridqc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "hybridqc/errors.hpp"
#include "hybridqc/numerics.hpp"

namespace hybridqc {

Integrator parse_integrator(std::string_view tag) {
  if (tag == "piecewise-exact" || tag == "piecewise" || tag == "exact") return Integrator::piecewise_exact;
  if (tag == "adaptive" || tag == "adaptive-rk" || tag == "rk") return Integrator::adaptive;
  throw ValidationError("unknown integrator '" + std::string(tag) + "' (expected piecewise-exact or adaptive)");
}

std::string to_string(Integrator integrator) {
  return integrator == Integrator::piecewise_exact ? "piecewise-exact" : "adaptive";
}

void PropagationOptions::validate(const PulseSchedule& schedule) const {
  if (!(tolerance > 0.0 && tolerance <= 1e-4)) throw ValidationError("tolerance must lie in (0, 1e-4]");
  if (!(grid > 0.0)) throw ValidationError("output grid spacing must be positive");
  if (integrator == Integrator::piecewise_exact) {
    if (picture != Picture::schrodinger)
      throw ValidationError("the piecewise-exact integrator works in the Schrodinger picture only");
    if (!schedule.steps_only())
      throw ValidationError("the piecewise-exact integrator needs step pulses; use the adaptive integrator for ramps");
  }
}

namespace {

// Detuning profile bound to mode indices, evaluated without string lookups.
class BoundSchedule {
 public:
  BoundSchedule(const DeviceSpec& device, const PulseSchedule& schedule) : values_(device.modes.size(), 0.0) {
    for (const auto& p : schedule.pulses) {
      const int m = device.mode_index(p.mode);
      if (m < 0) throw ValidationError("pulse on unknown mode '" + p.mode + "'");
      pulses_.emplace_back(static_cast<std::size_t>(m), p);
    }
  }
  const std::vector<double>& at(double t) {
    std::fill(values_.begin(), values_.end(), 0.0);
    for (const auto& [m, p] : pulses_) values_[m] += p.value_at(t);
    return values_;
  }

 private:
  std::vector<std::pair<std::size_t, Pulse>> pulses_;
  std::vector<double> values_;
};

std::vector<double> output_grid(TimeSpan span, double spacing) {
  std::vector<double> out;
  const double length = span.end - span.start;
  const auto steps = static_cast<long>(std::floor(length / spacing + 1e-9));
  for (long i = 0; i <= steps; ++i) out.push_back(span.start + static_cast<double>(i) * spacing);
  if (span.end - out.back() > 1e-9) out.push_back(span.end);
  else out.back() = span.end;
  return out;
}

std::vector<double> merge_times(const std::vector<double>& grid, const std::vector<double>& breaks) {
  std::vector<double> all(grid);
  all.insert(all.end(), breaks.begin(), breaks.end());
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double t : all)
    if (out.empty() || t - out.back() > 1e-12) out.push_back(t);
  return out;
}

void check_initial(const System& system, const Eigen::VectorXcd& initial) {
  if (static_cast<std::size_t>(initial.size()) != system.dimension())
    throw ValidationError("initial state has dimension " + std::to_string(initial.size()) + ", basis has " +
                          std::to_string(system.dimension()));
  if (std::abs(initial.squaredNorm() - 1.0) > 1e-10) throw ValidationError("initial state is not normalized");
}

}  // namespace

Trajectory propagate(const System& system, const Eigen::VectorXcd& initial, const PulseSchedule& schedule,
                     TimeSpan span, const PropagationOptions& options) {
  options.validate(schedule);
  check_initial(system, initial);
  if (span.end < span.start) throw ValidationError("time span ends before it starts");

  Trajectory traj;
  traj.picture = options.picture;
  traj.lossy = options.loss;
  for (const auto& p : schedule.pulses) {
    std::ostringstream a;
    a << p.stage << ": mode " << p.mode << " [" << p.support_start() << ", " << p.support_end() << "] ns";
    traj.annotations.push_back(a.str());
  }

  const std::vector<double> grid = output_grid(span, options.grid);
  const std::vector<double> events = merge_times(grid, schedule.breakpoints(span.start, span.end));
  BoundSchedule profile(system.device(), schedule);

  Eigen::VectorXcd psi = initial;
  auto store = [&](double t) {
    traj.times.push_back(t);
    traj.norm2.push_back(psi.squaredNorm());
    traj.states.push_back(psi);
  };

  std::size_t next_grid = 0;
  auto maybe_store = [&](double t) {
    while (next_grid < grid.size() && std::abs(grid[next_grid] - t) <= 1e-12) {
      store(grid[next_grid]);
      ++next_grid;
    }
  };
  maybe_store(events.front());

  if (options.integrator == Integrator::piecewise_exact) {
    const double local_tol = std::min(1e-13, 1e-3 * options.tolerance);
    for (std::size_t i = 0; i + 1 < events.size(); ++i) {
      const double a = events[i], b = events[i + 1];
      const std::vector<double> det = profile.at(0.5 * (a + b));
      numerics::ApplyFn op = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
        system.apply(det, Picture::schrodinger, 0.0, options.loss, in, out);
      };
      numerics::krylov_expmv(op, b - a, psi, local_tol);
      maybe_store(b);
    }
  } else {
    numerics::Dop853Options rk;
    // Local error control well below the requested accuracy so the global
    // error over thousands of steps stays inside it.
    rk.rtol = std::max(1e-3 * options.tolerance, 1e-12);
    rk.atol = rk.rtol;
    double step = 0.0;
    if (options.picture == Picture::interaction) {
      Eigen::VectorXcd hpsi(psi.size());
      numerics::RhsFn rhs = [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        system.apply(profile.at(t), Picture::interaction, t, options.loss, y, hpsi);
        dy = complex(0.0, -1.0) * hpsi;
      };
      for (std::size_t i = 0; i + 1 < events.size(); ++i) {
        numerics::dop853(rhs, events[i], events[i + 1], psi, rk, step);
        maybe_store(events[i + 1]);
      }
    } else {
      // Between events the profile is linear, so the diagonal part integrates
      // in closed form; the solver sees only the couplings in that rotating frame.
      const auto dim = psi.size();
      Eigen::VectorXcd mid(dim), slope(dim), x(dim), vx(dim);
      double a = 0.0, m = 0.0;
      auto phase = [&](double t) {
        return (mid * (t - a) + 0.5 * slope * ((t - m) * (t - m) - (a - m) * (a - m))).eval();
      };
      auto diagonal = [&](double t) {
        Eigen::VectorXcd d = system.diagonal(profile.at(t)).cast<complex>();
        if (options.loss) d -= complex(0.0, 1.0) * system.terms().loss.cast<complex>();
        return d;
      };
      numerics::RhsFn rhs = [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        const Eigen::VectorXcd p = phase(t);
        for (long i = 0; i < dim; ++i) x(i) = std::exp(complex(0.0, -1.0) * p(i)) * y(i);
        system.apply_couplings(x, vx);
        dy.resize(dim);
        for (long i = 0; i < dim; ++i) dy(i) = complex(0.0, -1.0) * std::exp(complex(0.0, 1.0) * p(i)) * vx(i);
      };
      for (std::size_t i = 0; i + 1 < events.size(); ++i) {
        a = events[i];
        const double b = events[i + 1], q = 0.25 * (b - a);
        m = 0.5 * (a + b);
        mid = diagonal(m);
        slope = (diagonal(m + q) - diagonal(m - q)) / (2.0 * q);
        numerics::dop853(rhs, a, b, psi, rk, step);
        const Eigen::VectorXcd p = phase(b);
        for (long k = 0; k < dim; ++k) psi(k) *= std::exp(complex(0.0, -1.0) * p(k));
        maybe_store(b);
      }
    }
  }

  if (!options.loss) {
    double drift = 0.0;
    for (double n : traj.norm2) drift = std::max(drift, std::abs(n - 1.0));
    if (drift > 10.0 * options.tolerance)
      {
      std::ostringstream m;
      m << "norm drift " << std::scientific << drift << " exceeds ten times the tolerance " << options.tolerance;
      throw NumericError(m.str(), drift);
    }
  }
  return traj;
}

Trajectory propagate_lossy(const System& system, const Eigen::VectorXcd& initial, const PulseSchedule& schedule,
                           TimeSpan span, PropagationOptions options) {
  if (!system.device().has_loss()) throw ValidationError("lossy propagation needs at least one positive loss rate");
  options.loss = true;
  return propagate(system, initial, schedule, span, options);
}

Eigen::VectorXcd evolve(const System& system, const Eigen::VectorXcd& initial, const PulseSchedule& schedule,
                        const PropagationOptions& options) {
  PropagationOptions o = options;
  o.grid = std::max(schedule.duration, 1e-9);
  return propagate(system, initial, schedule, {0.0, schedule.duration}, o).final_state();
}

Eigen::VectorXcd oracle_propagate(const System& system, const Eigen::VectorXcd& initial,
                                  const PulseSchedule& schedule, TimeSpan span, bool loss) {
  const std::size_t dim = system.dimension();
  if (dim > oracle_dimension_limit)
    throw ValidationError("dense oracle limited to dimension " + std::to_string(oracle_dimension_limit) + ", got " +
                          std::to_string(dim));
  if (static_cast<std::size_t>(initial.size()) != dim) throw ValidationError("initial state has the wrong dimension");
  if (span.end < span.start) throw ValidationError("time span ends before it starts");

  std::vector<double> events = schedule.breakpoints(span.start, span.end);
  events.insert(events.begin(), span.start);
  events.push_back(span.end);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end(), [](double x, double y) { return std::abs(x - y) <= 1e-12; }),
               events.end());

  const auto& device = system.device();
  auto generator = [&](double t) -> Eigen::MatrixXcd {
    const std::vector<double> det = schedule.detunings_at(device, t);
    return complex(0.0, -1.0) * system.dense_hamiltonian(det, Picture::schrodinger, 0.0, loss);
  };
  // Fourth-order Magnus step over [a, b]; exact when the generator is constant.
  const double g1 = 0.5 - std::sqrt(3.0) / 6.0, g2 = 0.5 + std::sqrt(3.0) / 6.0;
  auto magnus = [&](double a, double b, const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
    const double h = b - a;
    const Eigen::MatrixXcd x1 = generator(a + g1 * h), x2 = generator(a + g2 * h);
    const Eigen::MatrixXcd omega = 0.5 * h * (x1 + x2) + (std::sqrt(3.0) / 12.0) * h * h * (x2 * x1 - x1 * x2);
    return omega.exp() * v;
  };

  Eigen::VectorXcd psi = initial;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    const double a = events[i], b = events[i + 1];
    if (b - a <= 0.0) continue;
    Eigen::VectorXcd previous;
    bool converged = false;
    for (int pieces = 1; pieces <= (1 << 16); pieces *= 2) {
      Eigen::VectorXcd v = psi;
      const double h = (b - a) / pieces;
      for (int k = 0; k < pieces; ++k) v = magnus(a + k * h, k + 1 == pieces ? b : a + (k + 1) * h, v);
      if (previous.size() && (v - previous).cwiseAbs().maxCoeff() < 1e-12) {
        psi = v;
        converged = true;
        break;
      }
      previous = std::move(v);
    }
    if (!converged) throw NumericError("dense oracle failed to converge on an interval");
  }
  return psi;
}

}  // namespace hybridqc
