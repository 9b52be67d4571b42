#pragma once

#include <cstdint>
#include <vector>

#include "ym2/exact.hpp"

namespace ym2::rep {

// Dominant weight of U(N): a non-increasing sequence of N relative integers.
struct HighestWeight {
  std::vector<long long> entries;

  int rank() const { return static_cast<int>(entries.size()); }
  static HighestWeight zero(int N) { return HighestWeight{std::vector<long long>(N, 0)}; }
  bool operator==(const HighestWeight& o) const { return entries == o.entries; }
  bool operator<(const HighestWeight& o) const { return entries < o.entries; }
};

void validate(const HighestWeight& w);

// Strictly decreasing half-integer sequence l_i = lambda_i + (N-2i+1)/2,
// stored doubled so everything stays integral.
struct ShiftedWeight {
  std::vector<long long> doubled_entries;
};

ShiftedWeight shifted(const HighestWeight& w);

struct IrrepData {
  HighestWeight weight;
  Int dimension;
  Rat casimir;
};

// Weyl dimension formula: prod_{i<j} (l_i - l_j + j - i) / (j - i), exact.
Int dimension(const HighestWeight& w);

// Quadratic Casimir: (sum l_i^2 + sum_{i<j} (l_i - l_j)) / N, exact.
Rat casimir(const HighestWeight& w);

IrrepData irrep_data(const HighestWeight& w);

// All dominant mu obtained from lambda by adding 1 to exactly one component,
// ordered by the index of the incremented component.
std::vector<HighestWeight> pieri_successors(const HighestWeight& w);

struct WeightEnumOptions {
  std::size_t max_count = 4'000'000;
};

// The exact set { lambda : c2(lambda) <= cutoff }, in lexicographic order.
std::vector<HighestWeight> enumerate_weights(int N, double casimir_cutoff,
                                             const WeightEnumOptions& opts = {});

// Exact finite-N value of E[tr(H^n)] for a simple plane loop of area t,
// via the alternating hook expansion of the n-th power sum.
double plane_trace_moment(int n, double t, int N);

struct TruncatedSum {
  double value = 0.0;
  double tail_estimate = 0.0;
  double cutoff = 0.0;
  std::size_t terms = 0;
};

// Heat-kernel partition function on the sphere: sum e^{-c2 T/2} d^2.
TruncatedSum partition_function_sphere(int N, double T, double cutoff,
                                       const WeightEnumOptions& opts = {});

// Genus-g partition function: sum d^{2-2g} e^{-c2 * area / 2}.
TruncatedSum partition_function_genus(int N, int genus, double total_area, double cutoff,
                                      const WeightEnumOptions& opts = {});

// E[tr(H_l)] for a simple loop of area t on a sphere of total area T,
// via the Pieri / shifted-weight sum.  cutoff <= 0 selects automatically
// from tol.
double sphere_simple_loop_expectation(int N, double T, double t, double cutoff = -1.0,
                                      double tol = 1e-12);

// Truncated Fourier series of the heat kernel evaluated at the unitary matrix
// with the given eigenvalue angles.  Near-coincident angles are perturbed and
// Richardson-extrapolated; expected extra error is O(1e-7) in that regime.
double heat_kernel_density(double time, const std::vector<double>& eigenangles, double cutoff);

}  // namespace ym2::rep
