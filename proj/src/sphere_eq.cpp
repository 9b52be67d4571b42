#include "ym2/sphere_eq.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ym2/errors.hpp"

namespace ym2::sphere {

namespace {

// Euclidean projection onto { 0 <= w_i <= cap, sum w_i = 1 }: clip(v - tau)
// with tau located exactly on the sorted breakpoints.
void project_capped_simplex(std::vector<double>& v, double cap) {
  const std::size_t n = v.size();
  std::vector<double> bp;
  bp.reserve(2 * n);
  for (double x : v) {
    bp.push_back(x);
    bp.push_back(x - cap);
  }
  std::sort(bp.begin(), bp.end());
  auto mass = [&](double tau) {
    double m = 0.0;
    for (double x : v) m += std::clamp(x - tau, 0.0, cap);
    return m;
  };
  // mass is non-increasing and piecewise linear in tau; bracket on breakpoints
  std::size_t lo = 0, hi = bp.size() - 1;
  if (mass(bp[lo]) < 1.0) {
    // tau below all breakpoints: mass = sum clip = n*cap or ... extend left
    double tau = bp[lo] - 1.0;
    while (mass(tau) < 1.0) tau -= 1.0;
    // linear segment: everything either 0 or cap or linear; just bisect
    double a = tau, b = bp[lo];
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (a + b);
      (mass(mid) >= 1.0 ? a : b) = mid;
    }
    for (auto& x : v) x = std::clamp(x - a, 0.0, cap);
    return;
  }
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (mass(bp[mid]) >= 1.0)
      lo = mid;
    else
      hi = mid;
  }
  // linear on [bp[lo], bp[hi]]: solve exactly
  const double mlo = mass(bp[lo]), mhi = mass(bp[hi]);
  double tau;
  if (mlo == mhi)
    tau = bp[lo];
  else
    tau = bp[lo] + (mlo - 1.0) * (bp[hi] - bp[lo]) / (mlo - mhi);
  for (auto& x : v) x = std::clamp(x - tau, 0.0, cap);
}

struct Objective {
  std::vector<double> x;
  double h = 0.0;
  double T = 0.0;
  double self_coeff = 0.0;  // within-cell energy: (3/2 - log h) per unit w^2
  std::vector<double> K;    // dense kernel, row-major, diagonal = self_coeff

  int n() const { return static_cast<int>(x.size()); }

  void kernel_apply(const std::vector<double>& w, std::vector<double>& out) const {
    const int m = n();
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      const double* row = &K[static_cast<std::size_t>(i) * m];
      for (int j = 0; j < m; ++j) acc += row[j] * w[j];
      out[i] = acc;
    }
  }

  double energy(const std::vector<double>& w, std::vector<double>& Kw) const {
    kernel_apply(w, Kw);
    double e = 0.0;
    for (int i = 0; i < n(); ++i) e += w[i] * Kw[i] + 0.5 * T * x[i] * x[i] * w[i];
    return e;
  }

  void gradient(const std::vector<double>& Kw, std::vector<double>& g) const {
    for (int i = 0; i < n(); ++i) g[i] = 2.0 * Kw[i] + 0.5 * T * x[i] * x[i];
  }
};

void symmetrize(std::vector<double>& w) {
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double m = 0.5 * (w[i] + w[n - 1 - i]);
    w[i] = w[n - 1 - i] = m;
  }
}

}  // namespace

double semicircle_density(double T, double x) {
  const double r = 2.0 / std::sqrt(T);
  if (std::abs(x) >= r) return 0.0;
  return (T / (2.0 * M_PI)) * std::sqrt(r * r - x * x);
}

double semicircle_cell_mass(double T, double a, double b) {
  const double r = 2.0 / std::sqrt(T);
  auto cdf_part = [&](double x) {
    x = std::clamp(x, -r, r);
    // antiderivative of density: T/(2 pi) [ x/2 sqrt(r^2-x^2) + r^2/2 asin(x/r) ]
    return (T / (2.0 * M_PI)) * (0.5 * x * std::sqrt(std::max(0.0, r * r - x * x)) +
                                 0.5 * r * r * std::asin(std::clamp(x / r, -1.0, 1.0)));
  };
  return cdf_part(b) - cdf_part(a);
}

EquilibriumResult minimize_JT(double T, const MinimizeOptions& opts) {
  if (T <= 0) fail(ErrorCategory::argument, "total area must be positive");
  if (opts.grid_size < 16) fail(ErrorCategory::argument, "grid too small");
  const int n = opts.grid_size;
  const double L = 2.0 / std::sqrt(T) * opts.margin;
  const double h = 2.0 * L / n;

  Objective obj;
  obj.T = T;
  obj.h = h;
  obj.self_coeff = 1.5 - std::log(h);
  obj.x.resize(n);
  for (int i = 0; i < n; ++i) obj.x[i] = -L + (i + 0.5) * h;
  obj.K.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    obj.K[static_cast<std::size_t>(i) * n + i] = obj.self_coeff;
    for (int j = i + 1; j < n; ++j) {
      const double v = -std::log(std::abs(obj.x[i] - obj.x[j]));
      obj.K[static_cast<std::size_t>(i) * n + j] = v;
      obj.K[static_cast<std::size_t>(j) * n + i] = v;
    }
  }

  // start from the clipped, renormalized semicircle
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = std::min(h, semicircle_cell_mass(T, obj.x[i] - 0.5 * h, obj.x[i] + 0.5 * h));
  {
    double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= s;
    project_capped_simplex(w, h);
  }
  symmetrize(w);

  EquilibriumResult res;
  std::vector<double> Kw(n), g(n), trial(n), Kt(n);
  double E = obj.energy(w, Kw);
  res.energy_trace.push_back(E);
  double step = 0.5;
  int stalled = 0;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    obj.gradient(Kw, g);
    bool accepted = false;
    for (int back = 0; back < 60; ++back) {
      for (int i = 0; i < n; ++i) trial[i] = w[i] - step * g[i];
      project_capped_simplex(trial, h);
      symmetrize(trial);
      const double Et = obj.energy(trial, Kt);
      if (Et <= E) {
        const double drop = E - Et;
        w.swap(trial);
        Kw.swap(Kt);
        E = Et;
        res.energy_trace.push_back(E);
        accepted = true;
        step *= 1.3;
        stalled = drop < opts.tol * std::max(1.0, std::abs(E)) ? stalled + 1 : 0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || stalled >= 24) break;
  }
  if (it >= opts.max_iters)
    fail(ErrorCategory::solver,
         "equilibrium solver hit the iteration budget (energy " + std::to_string(E) + ")");

  res.iterations = it;
  res.energy = E;
  res.measure.grid = obj.x;
  res.measure.spacing = h;
  res.measure.weights = w;

  const double wmax_tol = h * (1.0 - 1e-6);
  const double support_tol = 1e-12;
  res.support_lo = obj.x.back();
  res.support_hi = obj.x.front();
  bool cap_seen = false;
  for (int i = 0; i < n; ++i) {
    if (w[i] > support_tol) {
      res.support_lo = std::min(res.support_lo, obj.x[i]);
      res.support_hi = std::max(res.support_hi, obj.x[i]);
    }
    if (w[i] >= wmax_tol) {
      if (!cap_seen) {
        res.cap_lo = obj.x[i];
        cap_seen = true;
      }
      res.cap_hi = obj.x[i];
    }
  }
  res.has_cap = cap_seen;

  // Crude h-refinement estimate: energy of the same measure pooled onto a
  // grid of half the resolution.
  {
    const int m = n / 2;
    std::vector<double> wc(m, 0.0), xc(m, 0.0);
    for (int i = 0; i < m; ++i) {
      wc[i] = w[2 * i] + w[2 * i + 1];
      xc[i] = 0.5 * (obj.x[2 * i] + obj.x[2 * i + 1]);
    }
    const double hc = 2 * h;
    double Ec = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j)
        Ec += wc[i] * wc[j] *
              (i == j ? 1.5 - std::log(hc) : -std::log(std::abs(xc[i] - xc[j])));
      Ec += 0.5 * T * xc[i] * xc[i] * wc[i];
    }
    res.discretization_estimate = std::max(std::abs(Ec - E), 1e-12);
  }
  return res;
}

double free_energy(double T, const MinimizeOptions& opts) {
  const auto eq = minimize_JT(T, opts);
  return T / 24.0 + 1.5 - eq.energy;
}

double dn_moment(int n, double T, double t, const EquilibriumResult& eq) {
  if (n < 1) fail(ErrorCategory::argument, "moment order must be >= 1");
  if (!(t > 0 && t < T)) fail(ErrorCategory::argument, "need 0 < t < T");
  const auto& m = eq.measure;
  double acc = 0.0;
  for (std::size_t i = 0; i < m.grid.size(); ++i) {
    const double rho = m.density(i);
    if (rho < -1e-9 || rho > 1.0 + 1e-9)
      fail(ErrorCategory::argument, "corrupted input: density outside [0,1]");
    if (rho <= 0) continue;
    acc += std::cosh(0.5 * n * m.grid[i] * (T - 2.0 * t)) *
           std::sin(n * M_PI * std::clamp(rho, 0.0, 1.0)) * m.spacing;
  }
  return acc / (n * M_PI);
}

}  // namespace ym2::sphere
