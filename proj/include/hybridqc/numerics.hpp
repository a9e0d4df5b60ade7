#pragma once

#include <Eigen/Dense>
#include <functional>

// Integrator kernels shared by the propagation routines.
namespace hybridqc::numerics {

// Matrix exponential by 13th-order Pade approximation with scaling and squaring.
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a);

// out = M * in
using ApplyFn = std::function<void(const Eigen::VectorXcd& in, Eigen::VectorXcd& out)>;

struct KrylovStats {
  int substeps = 0;
  int largest_subspace = 0;
  double error = 0.0;
};

// v <- exp(-i t M) v using Arnoldi subspaces of at most max_dim vectors.
// `tol` bounds the accumulated truncation error estimate of the whole step.
KrylovStats krylov_expmv(const ApplyFn& apply, double t, Eigen::VectorXcd& v, double tol, int max_dim = 30);

// dy = f(t, y)
using RhsFn = std::function<void(double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy)>;

struct Dop853Options {
  double rtol = 1e-10;
  double atol = 1e-10;
  double max_step = 0.0;  // 0 means unbounded
  long max_steps = 2000000;
};

struct Dop853Stats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
  double worst_error = 0.0;
};

// Dormand-Prince 8(5,3) with step-size control. `step` carries the step size
// between calls; pass 0 to let the routine choose one.
Dop853Stats dop853(const RhsFn& f, double t0, double t1, Eigen::VectorXcd& y, const Dop853Options& options,
                   double& step);

}  // namespace hybridqc::numerics
