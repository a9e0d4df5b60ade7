#include "exchange.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>

#include "hybridqc/units.hpp"

namespace hybridqc::detail {

namespace {

using complex = std::complex<double>;
using Matrix2 = Eigen::Matrix2cd;

// exp(-i H) for a 2x2 Hermitian H.
Matrix2 expi(const Matrix2& h) {
  const complex c0 = 0.5 * (h(0, 0) + h(1, 1));
  const double z = 0.5 * (h(0, 0) - h(1, 1)).real();
  const complex off = h(0, 1);
  const double r = std::sqrt(z * z + std::norm(off));
  Matrix2 n = Matrix2::Zero();
  if (r > 0.0) n << z / r, off / r, std::conj(off) / r, -z / r;
  return std::exp(complex(0.0, -1.0) * c0) * (std::cos(r) * Matrix2::Identity() - complex(0.0, std::sin(r)) * n);
}

Matrix2 pair_hamiltonian(double mismatch, double rabi) {
  Matrix2 h;
  h << mismatch, 0.5 * rabi, 0.5 * rabi, 0.0;
  return h;
}

// Propagator of an exchanging pair while its frequency mismatch moves
// linearly from a to b over `span`: fourth-order Magnus steps, refined
// until it stops changing.
Matrix2 ramp_propagator(double a, double b, double rabi, double span) {
  const double g = 0.5 / std::sqrt(3.0);
  Matrix2 previous = Matrix2::Zero();
  for (int pieces = 16;; pieces *= 2) {
    Matrix2 u = Matrix2::Identity();
    const double dt = span / pieces;
    for (int k = 0; k < pieces; ++k) {
      const Matrix2 h1 = pair_hamiltonian(a + (b - a) * (k + 0.5 - g) / pieces, rabi);
      const Matrix2 h2 = pair_hamiltonian(a + (b - a) * (k + 0.5 + g) / pieces, rabi);
      const Matrix2 m = 0.5 * dt * (h1 + h2) - complex(0.0, std::sqrt(3.0) * dt * dt / 12.0) * (h2 * h1 - h1 * h2);
      u = expi(m) * u;
    }
    if ((u - previous).cwiseAbs().maxCoeff() < 1e-13 || pieces >= (1 << 16)) return u;
    previous = u;
  }
}

// Ramped exchange pulse between the idle eigenstates of the pair, the states
// gates act on.
struct RampedExchange {
  double idle, rabi, ramp;
  Matrix2 basis;

  RampedExchange(double idle_, double rabi_, double ramp_) : idle(idle_), rabi(rabi_), ramp(ramp_) {
    Eigen::Matrix2d h;
    h << idle, 0.5 * rabi, 0.5 * rabi, 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(h);
    Eigen::Matrix2d v = eig.eigenvectors();
    if (std::abs(v(0, 0)) < std::abs(v(0, 1))) v.col(0).swap(v.col(1));
    basis = v.cast<complex>();
  }

  Matrix2 operator()(double plateau, double top) const {
    const Matrix2 flat = expi(plateau * pair_hamiltonian(top, rabi));
    if (ramp == 0.0) return basis.adjoint() * flat * basis;
    return basis.adjoint() * ramp_propagator(top, idle, rabi, ramp) * flat * ramp_propagator(idle, top, rabi, ramp) *
           basis;
  }
};

// Plateau with the same transfer oscillation phase as a step pulse of
// length `plateau0`.
double phase_matched_plateau(const RampedExchange& x, double top, double plateau0) {
  const Matrix2 up = ramp_propagator(x.idle, top, x.rabi, x.ramp) * x.basis;
  const Matrix2 down = x.basis.adjoint() * ramp_propagator(top, x.idle, x.rabi, x.ramp);
  const double w = std::hypot(top, x.rabi);
  Matrix2 n;
  n << top / w, x.rabi / w, x.rabi / w, -top / w;
  const complex alpha = (down * up)(1, 0);
  const complex beta = (down * (complex(0.0, -1.0) * n) * up)(1, 0);
  const double b = 0.5 * (std::norm(alpha) - std::norm(beta));
  const double c = (alpha * std::conj(beta)).real();
  const double x0 = w * plateau0;
  double phase = x0 - units::pi + std::atan2(c, b);
  phase += units::two_pi * std::round((x0 - phase) / units::two_pi);
  while (phase <= 0.0) phase += units::two_pi;
  return phase / w;
}

// Newton solve over (plateau, mismatch) nulling entry (row, 0) of the pair
// propagator; only a small trim that stays near resonance is accepted.
std::optional<Resolved> null_entry(const RampedExchange& x, int row, Resolved r, double plateau0, double top0) {
  auto residual = [&](double p, double t) { return x(p, t)(row, 0); };
  const double dp = 1e-6 * std::max(1.0, plateau0), dt = 1e-6 * x.rabi;
  Resolved best = r;
  double best_norm = std::abs(residual(r.plateau, r.top));
  for (int it = 0; it < 40 && best_norm > 1e-12; ++it) {
    const complex f = residual(r.plateau, r.top);
    const complex fp = (residual(r.plateau + dp, r.top) - residual(r.plateau - dp, r.top)) / (2.0 * dp);
    const complex ft = (residual(r.plateau, r.top + dt) - residual(r.plateau, r.top - dt)) / (2.0 * dt);
    Eigen::Matrix2d j;
    j << fp.real(), ft.real(), fp.imag(), ft.imag();
    if (std::abs(j.determinant()) < 1e-300) break;
    const Eigen::Vector2d step = j.fullPivLu().solve(Eigen::Vector2d(f.real(), f.imag()));
    r.plateau -= step(0);
    r.top -= step(1);
    const double norm = std::abs(residual(r.plateau, r.top));
    if (!(norm < best_norm)) break;
    best = r;
    best_norm = norm;
  }
  if (best.plateau > 0.0 && std::abs(best.top - top0) < 0.5 * x.rabi) return best;
  return std::nullopt;
}

// Which entry a complete rotation should null: 0 for a transfer, 1 for a
// return, -1 for anything partial. Judged both on the bare pair and between
// the idle eigenstates, so pulses already trimmed for either count.
int complete_rotation(const RampedExchange& step, double top, double rabi, double duration) {
  const double w = std::hypot(top, rabi);
  const double bare = std::pow(rabi / w * std::sin(0.5 * w * duration), 2);
  const double dressed = std::norm(step(duration, top)(1, 0));
  if (bare > 1.0 - 1e-6 || dressed > 1.0 - 1e-6) return 0;
  if (bare < 1e-6 || dressed < 1e-6) return 1;
  return -1;
}

}  // namespace

Resolved resolve_step(double idle, double top, double rabi, double duration, Goal goal) {
  const RampedExchange x(idle, rabi, 0.0);
  const Resolved literal{duration, top};
  const int row = goal == Goal::transfer ? 0 : goal == Goal::restore ? 1 : complete_rotation(x, top, rabi, duration);
  if (row < 0) return literal;
  return null_entry(x, row, literal, duration, top).value_or(literal);
}

Resolved resolve_ramped(double idle, double top, double rabi, double duration, double ramp) {
  const RampedExchange x(idle, rabi, ramp);
  const Resolved matched{phase_matched_plateau(x, top, duration), top};
  const int row = complete_rotation(RampedExchange(idle, rabi, 0.0), top, rabi, duration);
  if (row < 0) return matched;
  return null_entry(x, row, matched, duration, top).value_or(matched);
}

}  // namespace hybridqc::detail
