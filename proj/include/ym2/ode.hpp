#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "ym2/errors.hpp"

namespace ym2 {

struct OdeOptions {
  double atol = 1e-11;
  double rtol = 1e-10;
  double h_init = 0.05;
  int max_steps = 200000;
};

// Adaptive Dormand-Prince 5(4).
inline void integrate_dp5(
    const std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>& f,
    Eigen::VectorXd& y, double s0, double s1, const OdeOptions& opt = {}) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const int n = static_cast<int>(y.size());
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
  double s = s0, h = std::min(opt.h_init, s1 - s0);
  f(s, y, k1);
  for (int step = 0; step < opt.max_steps; ++step) {
    if (s >= s1) return;
    h = std::min(h, s1 - s);
    ytmp = y + h * a21 * k1;
    f(s + h / 5, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(s + 3 * h / 10, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(s + 4 * h / 5, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(s + 8 * h / 9, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(s + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(s + h, ynew, k7);
    Eigen::VectorXd err =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      scale = std::max(scale, std::abs(err[i]) / sc);
    }
    if (scale <= 1.0) {
      s += h;
      y = ynew;
      k1 = k7;
    }
    const double fac = std::clamp(0.9 * std::pow(scale > 0 ? scale : 1e-10, -0.2), 0.2, 5.0);
    h *= fac;
    if (h < 1e-14) fail(ErrorCategory::solver, "ODE step size underflow");
  }
  fail(ErrorCategory::solver, "ODE integration exceeded the step budget");
}

}  // namespace ym2
