#pragma once

#include <vector>

namespace ym2::sphere {

// Grid-supported probability measure with the density cap rho <= 1.
struct DiscretizedMeasure {
  std::vector<double> grid;  // cell centers, uniform spacing
  double spacing = 0.0;
  std::vector<double> weights;  // nonnegative, sum 1, each <= spacing

  double density(std::size_t i) const { return weights[i] / spacing; }
};

struct EquilibriumResult {
  DiscretizedMeasure measure;
  double energy = 0.0;  // discretized J_T at the minimizer
  double support_lo = 0.0, support_hi = 0.0;
  bool has_cap = false;
  double cap_lo = 0.0, cap_hi = 0.0;
  double discretization_estimate = 0.0;
  int iterations = 0;
  std::vector<double> energy_trace;  // per accepted iteration (non-increasing)
};

struct MinimizeOptions {
  int grid_size = 1024;
  double tol = 1e-11;       // stop when the energy decrease stalls below this
  int max_iters = 200000;
  double margin = 1.15;     // grid half-width relative to the semicircle edge
};

// Minimize J_T(mu) = sum_{i != j} -log|x_i - x_j| w_i w_j (+ within-cell
// self energy) + T/2 sum x_i^2 w_i over the capped simplex.
EquilibriumResult minimize_JT(double T, const MinimizeOptions& opts = {});

// Semicircle density with variance 1/T and its exact cell masses.
double semicircle_density(double T, double x);
double semicircle_cell_mass(double T, double a, double b);

// F(T) = T/24 + 3/2 - J_T(mu*).
double free_energy(double T, const MinimizeOptions& opts = {});

// (1/n pi) int cosh(n x (T-2t)/2) sin(n pi rho(x)) dx over the support.
double dn_moment(int n, double T, double t, const EquilibriumResult& eq);

}  // namespace ym2::sphere
