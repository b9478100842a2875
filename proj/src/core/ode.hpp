#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

#include "core/error.hpp"

namespace fopdg {

struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double h_init = 0.0;  // 0 = choose automatically
  double h_max = 0.0;   // 0 = full span
  long max_steps = 2000000;
};

// Dormand-Prince 5(4) with FSAL and a fifth-order-accurate dense output
// on the last accepted step. Integrates forward only; callers run
// backward systems by propagating in a forward auxiliary variable.
template <std::size_t N, typename Rhs>
class Dopri5 {
public:
  using Vec = std::array<double, N>;

  explicit Dopri5(Rhs rhs, OdeOptions opt = {}) : rhs_(std::move(rhs)), opt_(opt) {}

  void init(double t0, const Vec& y0, double t_end) {
    if (!(t_end > t0))
      throw Error(ErrorCode::invalid_argument, "ode: integration span must be forward");
    t_ = tp_ = t0;
    y_ = yp_ = y0;
    t_end_ = t_end;
    k1_ = rhs_(t0, y0);
    if (!finite(k1_) || !finite(y0))
      throw Error(ErrorCode::non_finite, "ode: non-finite initial data");
    steps_ = 0;
    h_ = opt_.h_init > 0 ? opt_.h_init : initial_step();
  }

  bool done() const { return t_ >= t_end_; }
  double t() const { return t_; }
  double t_prev() const { return tp_; }
  const Vec& y() const { return y_; }
  const Vec& y_prev() const { return yp_; }
  const Vec& deriv() const { return k1_; }  // f(t, y)

  // Advance one accepted step (never past t_end).
  void step() {
    if (done()) throw Error(ErrorCode::invalid_argument, "ode: step past end of span");
    double h = opt_.h_max > 0 ? std::min(h_, opt_.h_max) : h_;
    bool had_reject = false;

    for (;;) {
      if (++steps_ > opt_.max_steps)
        throw Error(ErrorCode::integrator_failure, "ode: step limit exceeded");
      if (t_ + h >= t_end_) h = t_end_ - t_;
      if (!(t_ + h > t_))
        throw Error(ErrorCode::integrator_failure, "ode: step size underflow");

      Vec k2, k3, k4, k5, k6, k7, ynew, yerr;
      stages(h, k2, k3, k4, k5, k6, k7, ynew, yerr);

      double err = finite(ynew) ? error_norm(ynew, yerr) : 2.0;
      if (!(err <= 1.0)) {  // reject (also catches NaN error)
        had_reject = true;
        double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.5;
        h *= std::min(fac, 0.9);
        continue;
      }

      prepare_dense(h, k3, k4, k5, k6, k7, ynew);
      tp_ = t_;
      yp_ = y_;
      h_last_ = h;
      t_ += h;
      y_ = ynew;
      k1_ = k7;  // FSAL

      double fac = 0.9 * std::pow(err > 1e-30 ? err : 1e-30, -0.2);
      fac = std::min(had_reject ? 1.0 : 10.0, std::max(0.2, fac));
      h_ = h * fac;
      return;
    }
  }

  // Dense evaluation, valid on [t_prev, t] of the last accepted step.
  Vec eval(double t) const {
    const double th = (t - tp_) / h_last_;
    const double th1 = 1.0 - th;
    Vec out;
    for (std::size_t i = 0; i < N; ++i)
      out[i] = rc1_[i] + th * (rc2_[i] + th1 * (rc3_[i] + th * (rc4_[i] + th1 * rc5_[i])));
    return out;
  }

private:
  static bool finite(const Vec& v) {
    for (double c : v)
      if (!std::isfinite(c)) return false;
    return true;
  }

  void stages(double h, Vec& k2, Vec& k3, Vec& k4, Vec& k5, Vec& k6, Vec& k7, Vec& ynew,
              Vec& yerr) const {
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    Vec w;
    for (std::size_t i = 0; i < N; ++i) w[i] = y_[i] + h * a21 * k1_[i];
    k2 = rhs_(t_ + c2 * h, w);
    for (std::size_t i = 0; i < N; ++i) w[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2[i]);
    k3 = rhs_(t_ + c3 * h, w);
    for (std::size_t i = 0; i < N; ++i)
      w[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs_(t_ + c4 * h, w);
    for (std::size_t i = 0; i < N; ++i)
      w[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs_(t_ + c5 * h, w);
    for (std::size_t i = 0; i < N; ++i)
      w[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = rhs_(t_ + h, w);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    k7 = rhs_(t_ + h, ynew);
    for (std::size_t i = 0; i < N; ++i)
      yerr[i] =
          h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
  }

  double error_norm(const Vec& ynew, const Vec& yerr) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc =
          opt_.abs_tol + opt_.rel_tol * std::max(std::fabs(y_[i]), std::fabs(ynew[i]));
      const double q = yerr[i] / sc;
      sum += q * q;
    }
    return std::sqrt(sum / N);
  }

  void prepare_dense(double h, const Vec& k3, const Vec& k4, const Vec& k5, const Vec& k6,
                     const Vec& k7, const Vec& ynew) {
    constexpr double d1 = -12715105075.0 / 11282082432.0;
    constexpr double d3 = 87487479700.0 / 32700410799.0;
    constexpr double d4 = -10690763975.0 / 1880347072.0;
    constexpr double d5 = 701980252875.0 / 199316789632.0;
    constexpr double d6 = -1453857185.0 / 822651844.0;
    constexpr double d7 = 69997945.0 / 29380423.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double ydiff = ynew[i] - y_[i];
      const double bspl = h * k1_[i] - ydiff;
      rc1_[i] = y_[i];
      rc2_[i] = ydiff;
      rc3_[i] = bspl;
      rc4_[i] = ydiff - h * k7[i] - bspl;
      rc5_[i] = h * (d1 * k1_[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
  }

  double initial_step() const {
    const double span = t_end_ - t_;
    const double hmax = opt_.h_max > 0 ? std::min(opt_.h_max, span) : span;
    double d0 = 0, d1 = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt_.abs_tol + opt_.rel_tol * std::fabs(y_[i]);
      d0 += (y_[i] / sc) * (y_[i] / sc);
      d1 += (k1_[i] / sc) * (k1_[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, hmax);

    Vec y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y_[i] + h0 * k1_[i];
    Vec f1 = rhs_(t_ + h0, y1);
    double d2 = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt_.abs_tol + opt_.rel_tol * std::fabs(y_[i]);
      const double q = (f1[i] - k1_[i]) / sc;
      d2 += q * q;
    }
    d2 = std::sqrt(d2 / N) / h0;

    const double dm = std::max(d1, d2);
    double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min({100 * h0, h1, hmax});
  }

  Rhs rhs_;
  OdeOptions opt_;
  double t_ = 0, tp_ = 0, t_end_ = 0, h_ = 0, h_last_ = 0;
  long steps_ = 0;
  Vec y_{}, yp_{}, k1_{};
  Vec rc1_{}, rc2_{}, rc3_{}, rc4_{}, rc5_{};
};

// Bisect a bracketed sign change of g on [ta, tb] down to width t_tol;
// returns the right endpoint, where the new sign holds.
template <typename G>
double bisect_root(G&& g, double ta, double tb, double t_tol) {
  double ga = g(ta);
  if (ga == 0.0) return ta;
  double gb = g(tb);
  if (gb == 0.0) return tb;
  if ((ga > 0) == (gb > 0))
    throw Error(ErrorCode::invalid_argument, "bisect_root: endpoints do not bracket a root");
  for (int it = 0; it < 200 && tb - ta > t_tol; ++it) {
    const double tm = 0.5 * (ta + tb);
    const double gm = g(tm);
    if (gm == 0.0) return tm;
    if ((gm > 0) == (ga > 0)) {
      ta = tm;
      ga = gm;
    } else {
      tb = tm;
    }
  }
  return tb;
}

}  // namespace fopdg
