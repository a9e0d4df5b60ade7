#include "hybridqc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hybridqc/errors.hpp"

namespace hybridqc::numerics {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cd = std::complex<double>;

MatrixXcd expm(const MatrixXcd& a) {
  static constexpr double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const long n = a.rows();
  if (n == 0) return a;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const MatrixXcd x = a / std::ldexp(1.0, squarings);
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  const MatrixXcd x2 = x * x, x4 = x2 * x2, x6 = x4 * x2;
  const MatrixXcd u = x * (x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id);
  const MatrixXcd v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;
  MatrixXcd r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

KrylovStats krylov_expmv(const ApplyFn& apply, double t, VectorXcd& v, double tol, int max_dim) {
  KrylovStats stats;
  const long n = v.size();
  if (n == 0 || t == 0.0) return stats;
  const int m = static_cast<int>(std::min<long>(max_dim, n));
  const cd minus_i(0.0, -1.0);
  MatrixXcd basis(n, m + 1);
  VectorXcd w(n);
  double done = 0.0;
  double tau = t;
  double scale = 0.0;  // running estimate of the operator norm

  while (done < t * (1.0 - 1e-15)) {
    const double beta = v.norm();
    if (beta == 0.0) break;
    if (++stats.substeps > 100000) throw NumericError("Krylov propagation needed too many substeps", stats.error);
    basis.col(0) = v / beta;
    MatrixXcd h = MatrixXcd::Zero(m + 2, m + 2);
    int used = m;
    bool breakdown = false;
    for (int j = 0; j < m; ++j) {
      apply(basis.col(j), w);
      w *= minus_i;
      scale = std::max(scale, w.norm());
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          const cd c = basis.col(i).dot(w);
          h(i, j) += c;
          w -= c * basis.col(i);
        }
      const double s = w.norm();
      if (s <= 1e-13 * std::max(scale, 1.0)) {
        breakdown = true;
        used = j + 1;
        break;
      }
      h(j + 1, j) = s;
      basis.col(j + 1) = w / s;
    }
    stats.largest_subspace = std::max(stats.largest_subspace, used);
    const double remaining = t - done;
    if (breakdown) {
      const MatrixXcd f = expm(remaining * h.topLeftCorner(used, used));
      v = beta * (basis.leftCols(used) * f.col(0));
      break;
    }
    apply(basis.col(m), w);
    const double avnorm = w.norm();
    h(m + 1, m) = 1.0;
    tau = std::min(tau, remaining);
    MatrixXcd f;
    double err = 0.0;
    for (int attempt = 0;; ++attempt) {
      f = expm(tau * h);
      const double err1 = beta * std::abs(f(m, 0));
      const double err2 = beta * std::abs(f(m + 1, 0)) * avnorm;
      if (err1 > 10.0 * err2) err = err2;
      else if (err1 > err2) err = err1 * err2 / (err1 - err2);
      else err = err1;
      const double allowed = 1.2 * tol * tau / t;
      if (err <= allowed) break;
      if (attempt > 60) throw NumericError("Krylov step size underflow", err);
      tau *= std::clamp(0.9 * std::pow(allowed / err, 1.0 / m), 0.05, 0.9);
    }
    v = beta * (basis * f.col(0).head(m + 1));
    done += tau;
    stats.error += err;
    const double grow = err > 0.0 ? 0.9 * std::pow(tol * tau / t / err, 1.0 / m) : 10.0;
    tau *= std::clamp(grow, 0.2, 10.0);
  }
  return stats;
}

namespace {

// Dormand-Prince 8(5,3) tableau.
constexpr double c2 = 0.526001519587677318785587544488E-01, c3 = 0.789002279381515978178381316732E-01,
                 c4 = 0.118350341907227396726757197510E+00, c5 = 0.281649658092772603273242802490E+00,
                 c6 = 0.333333333333333333333333333333E+00, c7 = 0.25E+00,
                 c8 = 0.307692307692307692307692307692E+00, c9 = 0.651282051282051282051282051282E+00,
                 c10 = 0.6E+00, c11 = 0.857142857142857142857142857142E+00;
constexpr double b1 = 5.42937341165687622380535766363E-2, b6 = 4.45031289275240888144113950566E0,
                 b7 = 1.89151789931450038304281599044E0, b8 = -5.8012039600105847814672114227E0,
                 b9 = 3.1116436695781989440891606237E-1, b10 = -1.52160949662516078556178806805E-1,
                 b11 = 2.01365400804030348374776537501E-1, b12 = 4.47106157277725905176885569043E-2;
constexpr double a21 = 5.26001519587677318785587544488E-2, a31 = 1.97250569845378994544595329183E-2,
                 a32 = 5.91751709536136983633785987549E-2, a41 = 2.95875854768068491816892993775E-2,
                 a43 = 8.87627564304205475450678981324E-2, a51 = 2.41365134159266685502369798665E-1,
                 a53 = -8.84549479328286085344864962717E-1, a54 = 9.24834003261792003115737966543E-1,
                 a61 = 3.7037037037037037037037037037E-2, a64 = 1.70828608729473871279604482173E-1,
                 a65 = 1.25467687566822425016691814123E-1, a71 = 3.7109375E-2,
                 a74 = 1.70252211019544039314978060272E-1, a75 = 6.02165389804559606850219397283E-2,
                 a76 = -1.7578125E-2;
constexpr double a81 = 3.70920001185047927108779319836E-2, a84 = 1.70383925712239993810214054705E-1,
                 a85 = 1.07262030446373284651809199168E-1, a86 = -1.53194377486244017527936158236E-2,
                 a87 = 8.27378916381402288758473766002E-3, a91 = 6.24110958716075717114429577812E-1,
                 a94 = -3.36089262944694129406857109825E0, a95 = -8.68219346841726006818189891453E-1,
                 a96 = 2.75920996994467083049415600797E1, a97 = 2.01540675504778934086186788979E1,
                 a98 = -4.34898841810699588477366255144E1, a101 = 4.77662536438264365890433908527E-1,
                 a104 = -2.48811461997166764192642586468E0, a105 = -5.90290826836842996371446475743E-1,
                 a106 = 2.12300514481811942347288949897E1, a107 = 1.52792336328824235832596922938E1,
                 a108 = -3.32882109689848629194453265587E1, a109 = -2.03312017085086261358222928593E-2;
constexpr double a111 = -9.3714243008598732571704021658E-1, a114 = 5.18637242884406370830023853209E0,
                 a115 = 1.09143734899672957818500254654E0, a116 = -8.14978701074692612513997267357E0,
                 a117 = -1.85200656599969598641566180701E1, a118 = 2.27394870993505042818970056734E1,
                 a119 = 2.49360555267965238987089396762E0, a1110 = -3.0467644718982195003823669022E0,
                 a121 = 2.27331014751653820792359768449E0, a124 = -1.05344954667372501984066689879E1,
                 a125 = -2.00087205822486249909675718444E0, a126 = -1.79589318631187989172765950534E1,
                 a127 = 2.79488845294199600508499808837E1, a128 = -2.85899827713502369474065508674E0,
                 a129 = -8.87285693353062954433549289258E0, a1210 = 1.23605671757943030647266201528E1,
                 a1211 = 6.43392746015763530355970484046E-1;
constexpr double bhh1 = 0.244094488188976377952755905512E+00, bhh2 = 0.733846688281611857341361741547E+00,
                 bhh3 = 0.220588235294117647058823529412E-01;
constexpr double er1 = 0.1312004499419488073250102996E-01, er6 = -0.1225156446376204440720569753E+01,
                 er7 = -0.4957589496572501915214079952E+00, er8 = 0.1664377182454986536961530415E+01,
                 er9 = -0.3503288487499736816886487290E+00, er10 = 0.3341791187130174790297318841E+00,
                 er11 = 0.8192320648511571246570742613E-01, er12 = -0.2235530786388629525884427845E-01;

}  // namespace

Dop853Stats dop853(const RhsFn& f, double t0, double t1, VectorXcd& y, const Dop853Options& opt, double& step) {
  Dop853Stats stats;
  const double span = t1 - t0;
  if (span <= 0.0) return stats;
  const long n = y.size();
  VectorXcd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), k8(n), k9(n), k10(n), tmp(n), ynew(n);
  f(t0, y, k1);
  ++stats.evaluations;
  double h = step;
  if (!(h > 0.0)) {
    const double rate = k1.cwiseAbs().maxCoeff() / std::max(y.cwiseAbs().maxCoeff(), 1e-300);
    h = rate > 0.0 ? 0.5 * std::pow(opt.rtol, 1.0 / 8.0) / rate : span;
  }
  const double hmax = opt.max_step > 0.0 ? opt.max_step : span;
  h = std::min({h, hmax, span});
  constexpr double safe = 0.9, fac1 = 0.333, fac2 = 6.0, expo = 1.0 / 8.0;
  double t = t0;
  bool reject = false;
  long total = 0;
  const double real_count = 2.0 * static_cast<double>(n);

  while (true) {
    bool last = false;
    if (t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }
    if (++total > opt.max_steps) throw NumericError("adaptive integrator exceeded its step budget", stats.worst_error);
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw NumericError("adaptive integrator step size underflow", stats.worst_error);

    tmp = y + h * a21 * k1;
    f(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a43 * k3);
    f(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a53 * k3 + a54 * k4);
    f(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a64 * k4 + a65 * k5);
    f(t + c6 * h, tmp, k6);
    tmp = y + h * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6);
    f(t + c7 * h, tmp, k7);
    tmp = y + h * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7);
    f(t + c8 * h, tmp, k8);
    tmp = y + h * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8);
    f(t + c9 * h, tmp, k9);
    tmp = y + h * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 + a107 * k7 + a108 * k8 + a109 * k9);
    f(t + c10 * h, tmp, k10);
    tmp = y + h * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 + a117 * k7 + a118 * k8 + a119 * k9 + a1110 * k10);
    f(t + c11 * h, tmp, k2);
    const double tph = t + h;
    tmp = y + h * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 + a128 * k8 + a129 * k9 +
                   a1210 * k10 + a1211 * k2);
    f(tph, tmp, k3);
    stats.evaluations += 11;
    k4 = b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k2 + b12 * k3;
    ynew = y + h * k4;

    double err = 0.0, err2 = 0.0;
    for (long i = 0; i < n; ++i) {
      const cd e2 = k4(i) - bhh1 * k1(i) - bhh2 * k9(i) - bhh3 * k3(i);
      const cd e = er1 * k1(i) + er6 * k6(i) + er7 * k7(i) + er8 * k8(i) + er9 * k9(i) + er10 * k10(i) +
                   er11 * k2(i) + er12 * k3(i);
      const double sr = opt.atol + opt.rtol * std::max(std::abs(y(i).real()), std::abs(ynew(i).real()));
      const double si = opt.atol + opt.rtol * std::max(std::abs(y(i).imag()), std::abs(ynew(i).imag()));
      err2 += std::pow(e2.real() / sr, 2) + std::pow(e2.imag() / si, 2);
      err += std::pow(e.real() / sr, 2) + std::pow(e.imag() / si, 2);
    }
    const double deno = err + 0.01 * err2;
    err = std::abs(h) * err * std::sqrt(1.0 / (deno <= 0.0 ? real_count : deno * real_count));

    const double fac11 = std::pow(err, expo);
    double fac = std::max(1.0 / fac2, std::min(1.0 / fac1, fac11 / safe));
    double hnew = h / fac;
    if (err <= 1.0) {
      stats.worst_error = std::max(stats.worst_error, err);
      ++stats.accepted;
      y = ynew;
      t = tph;
      if (last) {
        step = std::min(hnew, hmax);
        return stats;
      }
      f(t, y, k1);
      ++stats.evaluations;
      hnew = std::min(hnew, hmax);
      if (reject) hnew = std::min(hnew, h);
      reject = false;
    } else {
      hnew = h / std::min(1.0 / fac1, fac11 / safe);
      reject = true;
      ++stats.rejected;
    }
    h = hnew;
  }
}

}  // namespace hybridqc::numerics
