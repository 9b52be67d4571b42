#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ym2/rng.hpp"

namespace ym2::ubm {

using Matrix = Eigen::MatrixXcd;

// Gaussian element of u(N) under <X,Y> = N Tr(X*Y): anti-Hermitian with
// entrywise variance 1/N up to the symmetry.
Matrix gaussian_algebra_element(int N, RandomStream& rng);

// max |U*U - I|
double unitarity_defect(const Matrix& U);

// Advance a Brownian path on U(N) from U over duration dt using geodesic
// steps of size <= step, re-projecting to the unitary group as it goes.
void advance_unitary_bm(Matrix& U, double dt, double step, RandomStream& rng);

// Sample U_t for the Brownian motion started at the identity.
Matrix sample_unitary_bm(int N, double t, double step, RandomStream& rng);

// Haar-distributed unitary (Ginibre + QR with phase fix).
Matrix haar_unitary(int N, RandomStream& rng);

struct WordLetter {
  int process;             // which independent Brownian motion
  std::string time_label;  // resolved via the times map at evaluation
  int exponent;            // +1 or -1
};

// A product of normalized traces of words in independent unitary Brownian
// motions: trace_groups partitions [0, letters.size()) into traced factors.
struct WordSpec {
  std::vector<WordLetter> letters;
  std::vector<std::pair<int, int>> trace_groups;  // [begin, end) ranges
};

struct McEstimate {
  double mean = 0.0;
  double stderror = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double step = 0.0;
};

// Monte Carlo estimate of E[prod_g tr(prod_{letters in g} U^{+-1})].
// Bit-for-bit reproducible for fixed (seed, step, samples) regardless of the
// number of worker threads.
McEstimate estimate_wilson_word(const WordSpec& word,
                                const std::map<std::string, double>& times, int N,
                                std::size_t samples, double step, std::uint64_t seed);

// Same, but with an arbitrary per-sample functional of the evaluated
// Brownian motions (used by gauge-covariance tests).
McEstimate estimate_word_functional(
    const WordSpec& word, const std::map<std::string, double>& times, int N,
    std::size_t samples, double step, std::uint64_t seed,
    const std::function<double(const std::map<std::pair<int, std::string>, Matrix>&)>& fn);

// Large-N limit of E[tr(H^n)] for a simple loop of area t:
// e^{-nt/2} sum_{k=0}^{n-1} (-t)^k/k! n^{k-1} C(n,k+1).
double biane_rains_moment(int n, double t);

// Deterministic pairwise tree reduction (thread-count independent).
double pairwise_sum(const std::vector<double>& v);

}  // namespace ym2::ubm
