#include "ym2/unitary_bm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ym2/errors.hpp"
#include "ym2/util.hpp"

namespace ym2::ubm {

Matrix gaussian_algebra_element(int N, RandomStream& rng) {
  Matrix G(N, N);
  const double dscale = 1.0 / std::sqrt(double(N));
  const double oscale = 1.0 / std::sqrt(2.0 * N);
  for (int j = 0; j < N; ++j) {
    G(j, j) = std::complex<double>(0.0, rng.next_gaussian() * dscale);
    for (int k = j + 1; k < N; ++k) {
      const double re = rng.next_gaussian() * oscale;
      const double im = rng.next_gaussian() * oscale;
      G(j, k) = std::complex<double>(re, im);
      G(k, j) = std::complex<double>(-re, im);
    }
  }
  return G;
}

double unitarity_defect(const Matrix& U) {
  Matrix D = U.adjoint() * U - Matrix::Identity(U.rows(), U.cols());
  return D.cwiseAbs().maxCoeff();
}

namespace {

// exp(A) for small anti-Hermitian A via Horner Taylor; ||A|| stays < 0.25
// in the stepping regime, so 9 terms reach ~1e-15.
Matrix expm_small(const Matrix& A) {
  const int N = static_cast<int>(A.rows());
  Matrix R = Matrix::Identity(N, N);
  for (int k = 9; k >= 1; --k) R = Matrix::Identity(N, N) + (A * R) / double(k);
  return R;
}

void reunitarize(Matrix& U) {
  // One Newton-Schulz sweep; quadratic, so a near-unitary input lands at
  // machine precision.
  const int N = static_cast<int>(U.rows());
  U = 0.5 * U * (3.0 * Matrix::Identity(N, N) - U.adjoint() * U);
}

}  // namespace

void advance_unitary_bm(Matrix& U, double dt, double step, RandomStream& rng) {
  if (dt < 0) fail(ErrorCategory::argument, "negative time increment");
  if (dt == 0) return;
  if (step <= 0) fail(ErrorCategory::argument, "step must be positive");
  const int N = static_cast<int>(U.rows());
  const int n = std::max<int>(1, static_cast<int>(std::ceil(dt / step - 1e-12)));
  const double h = dt / n;
  const double sq = std::sqrt(h);
  for (int i = 0; i < n; ++i) {
    Matrix G = gaussian_algebra_element(N, rng);
    U = U * expm_small((sq * G).eval());
    reunitarize(U);
  }
}

Matrix sample_unitary_bm(int N, double t, double step, RandomStream& rng) {
  if (t < 0) fail(ErrorCategory::argument, "time must be >= 0");
  if (t > 0 && step > t) fail(ErrorCategory::argument, "step exceeds requested time");
  Matrix U = Matrix::Identity(N, N);
  advance_unitary_bm(U, t, step, rng);
  return U;
}

Matrix haar_unitary(int N, RandomStream& rng) {
  Matrix Z(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      Z(i, j) = std::complex<double>(rng.next_gaussian(), rng.next_gaussian());
  Eigen::HouseholderQR<Matrix> qr(Z);
  Matrix Q = qr.householderQ();
  Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < N; ++i) {
    std::complex<double> d = R(i, i);
    Q.col(i) *= d / std::abs(d);
  }
  return Q;
}

double pairwise_sum(const std::vector<double>& v) {
  std::function<double(std::size_t, std::size_t)> rec = [&](std::size_t lo,
                                                            std::size_t hi) -> double {
    if (hi - lo <= 8) {
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += v[i];
      return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return rec(lo, mid) + rec(mid, hi);
  };
  return v.empty() ? 0.0 : rec(0, v.size());
}

namespace {

struct SampleContext {
  std::map<std::pair<int, std::string>, Matrix> values;
};

// Evaluate all needed (process, time) points for one sample in a fixed
// deterministic order.
SampleContext evaluate_processes(const WordSpec& word,
                                 const std::map<std::string, double>& times, int N,
                                 double step, std::uint64_t seed, std::size_t sample) {
  // Collect, per process, the labels sorted by time then label.
  std::map<int, std::vector<std::pair<double, std::string>>> needed;
  for (const auto& l : word.letters) {
    auto it = times.find(l.time_label);
    if (it == times.end())
      fail(ErrorCategory::argument, "no time bound to label '" + l.time_label + "'");
    if (it->second < 0) fail(ErrorCategory::argument, "times must be >= 0");
    needed[l.process].push_back({it->second, l.time_label});
  }
  SampleContext ctx;
  RandomStream rng(seed, sample);
  for (auto& [pid, pts] : needed) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    Matrix U = Matrix::Identity(N, N);
    double cur = 0.0;
    for (const auto& [t, label] : pts) {
      advance_unitary_bm(U, t - cur, step, rng);
      cur = t;
      ctx.values[{pid, label}] = U;
    }
  }
  return ctx;
}

double word_value(const WordSpec& word, const SampleContext& ctx, int N) {
  std::complex<double> prod = 1.0;
  for (const auto& [b, e] : word.trace_groups) {
    Matrix M = Matrix::Identity(N, N);
    for (int i = b; i < e; ++i) {
      const auto& l = word.letters[i];
      const Matrix& U = ctx.values.at({l.process, l.time_label});
      if (l.exponent == 1)
        M = M * U;
      else
        M = M * U.adjoint();
    }
    prod *= M.trace() / double(N);
  }
  return prod.real();
}

McEstimate reduce_samples(const std::vector<double>& vals, std::uint64_t seed, double step) {
  const std::size_t n = vals.size();
  const double mean = pairwise_sum(vals) / double(n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (vals[i] - mean) * (vals[i] - mean);
  const double var = n > 1 ? pairwise_sum(sq) / double(n - 1) : 0.0;
  McEstimate est;
  est.mean = mean;
  est.stderror = std::sqrt(var / double(n));
  est.samples = n;
  est.seed = seed;
  est.step = step;
  return est;
}

}  // namespace

namespace {

void validate_word(const WordSpec& word, const std::map<std::string, double>& times) {
  for (const auto& l : word.letters) {
    auto it = times.find(l.time_label);
    if (it == times.end())
      fail(ErrorCategory::argument, "no time bound to label '" + l.time_label + "'");
    if (it->second < 0) fail(ErrorCategory::argument, "times must be >= 0");
    if (l.exponent != 1 && l.exponent != -1)
      fail(ErrorCategory::argument, "letter exponents must be +1 or -1");
  }
  for (auto [b, e] : word.trace_groups)
    if (b < 0 || e > static_cast<int>(word.letters.size()) || b >= e)
      fail(ErrorCategory::argument, "bad trace group range");
}

}  // namespace

McEstimate estimate_wilson_word(const WordSpec& word,
                                const std::map<std::string, double>& times, int N,
                                std::size_t samples, double step, std::uint64_t seed) {
  if (samples == 0) fail(ErrorCategory::argument, "need at least one sample");
  validate_word(word, times);
  if (word.trace_groups.empty()) {
    McEstimate est;
    est.mean = 1.0;
    est.stderror = 0.0;
    est.samples = samples;
    est.seed = seed;
    est.step = step;
    return est;
  }
  std::vector<double> vals(samples);
  parallel_for(samples, [&](std::size_t s) {
    SampleContext ctx = evaluate_processes(word, times, N, step, seed, s);
    vals[s] = word_value(word, ctx, N);
  });
  return reduce_samples(vals, seed, step);
}

McEstimate estimate_word_functional(
    const WordSpec& word, const std::map<std::string, double>& times, int N,
    std::size_t samples, double step, std::uint64_t seed,
    const std::function<double(const std::map<std::pair<int, std::string>, Matrix>&)>& fn) {
  if (samples == 0) fail(ErrorCategory::argument, "need at least one sample");
  validate_word(word, times);
  std::vector<double> vals(samples);
  parallel_for(samples, [&](std::size_t s) {
    SampleContext ctx = evaluate_processes(word, times, N, step, seed, s);
    vals[s] = fn(ctx.values);
  });
  return reduce_samples(vals, seed, step);
}

double biane_rains_moment(int n, double t) {
  if (n < 1) fail(ErrorCategory::argument, "moment order must be >= 1");
  if (t < 0) fail(ErrorCategory::argument, "area must be >= 0");
  double acc = 0.0;
  double pow_term = 1.0 / n;  // (-t)^k / k! * n^(k-1), at k = 0
  for (int k = 0; k <= n - 1; ++k) {
    // C(n, k+1)
    double binom = 1.0;
    for (int i = 0; i < k + 1; ++i) binom = binom * (n - i) / (i + 1);
    acc += pow_term * binom;
    pow_term *= (-t) * n / (k + 1);
  }
  return std::exp(-0.5 * n * t) * acc;
}

}  // namespace ym2::ubm
