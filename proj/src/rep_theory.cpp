#include "ym2/rep_theory.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "ym2/errors.hpp"

namespace ym2::rep {

void validate(const HighestWeight& w) {
  if (w.entries.empty()) fail(ErrorCategory::argument, "highest weight needs rank >= 1");
  for (std::size_t i = 0; i + 1 < w.entries.size(); ++i)
    if (w.entries[i] < w.entries[i + 1])
      fail(ErrorCategory::argument, "highest weight entries must be non-increasing");
}

ShiftedWeight shifted(const HighestWeight& w) {
  const int N = w.rank();
  ShiftedWeight s;
  s.doubled_entries.resize(N);
  for (int i = 0; i < N; ++i)
    s.doubled_entries[i] = 2 * w.entries[i] + (N - 2 * (i + 1) + 1);
  return s;
}

Int dimension(const HighestWeight& w) {
  validate(w);
  const int N = w.rank();
  Int num = 1, den = 1;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      num *= Int(w.entries[i] - w.entries[j] + j - i);
      den *= Int(j - i);
    }
  return num / den;
}

Rat casimir(const HighestWeight& w) {
  validate(w);
  const int N = w.rank();
  Int acc = 0;
  for (int i = 0; i < N; ++i) acc += Int(w.entries[i]) * w.entries[i];
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) acc += Int(w.entries[i] - w.entries[j]);
  return Rat(acc, Int(N));
}

IrrepData irrep_data(const HighestWeight& w) { return {w, dimension(w), casimir(w)}; }

std::vector<HighestWeight> pieri_successors(const HighestWeight& w) {
  validate(w);
  std::vector<HighestWeight> out;
  for (int i = 0; i < w.rank(); ++i) {
    if (i == 0 || w.entries[i - 1] > w.entries[i]) {
      HighestWeight mu = w;
      mu.entries[i] += 1;
      out.push_back(std::move(mu));
    }
  }
  return out;
}

namespace {

// DFS over non-increasing tuples with pruning on the partial Casimir
// numerator (both the square part and the positive difference part only
// grow as entries are appended).
void enum_rec(int N, long long bound_num, std::vector<long long>& cur, long long sq_part,
              long long diff_part, long long prefix_sum, std::size_t max_count,
              std::vector<HighestWeight>& out) {
  const int k = static_cast<int>(cur.size());
  if (k == N) {
    if (out.size() >= max_count)
      fail(ErrorCategory::resource,
           "weight enumeration exceeds configured bound of " + std::to_string(max_count));
    out.push_back(HighestWeight{cur});
    return;
  }
  const long long root = static_cast<long long>(std::floor(std::sqrt(double(bound_num)))) + 1;
  long long hi = k == 0 ? root : cur.back();
  long long lo = -root;
  for (long long v = hi; v >= lo; --v) {
    // prefix_sum - k*v = sum_{i<=k} (lambda_i - v), the new difference mass.
    long long partial = sq_part + v * v + diff_part + (prefix_sum - k * v);
    if (partial > bound_num) {
      if (v <= 0) break;  // for v <= 0 the partial sum only grows as v decreases
      continue;
    }
    cur.push_back(v);
    enum_rec(N, bound_num, cur, sq_part + v * v, diff_part + (prefix_sum - k * v),
             prefix_sum + v, max_count, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<HighestWeight> enumerate_weights(int N, double casimir_cutoff,
                                             const WeightEnumOptions& opts) {
  if (N < 1) fail(ErrorCategory::argument, "rank must be >= 1");
  if (casimir_cutoff < 0) fail(ErrorCategory::argument, "cutoff must be >= 0");
  // c2 <= cutoff  <=>  N*c2 <= N*cutoff, all quantities integral on the left.
  long long bound_num = static_cast<long long>(std::floor(casimir_cutoff * N + 1e-9));
  std::vector<HighestWeight> out;
  std::vector<long long> cur;
  enum_rec(N, bound_num, cur, 0, 0, 0, opts.max_count, out);
  std::sort(out.begin(), out.end());
  return out;
}

double plane_trace_moment(int n, double t, int N) {
  if (n <= 0) fail(ErrorCategory::argument, "moment order must be positive");
  if (N < 1) fail(ErrorCategory::argument, "rank must be >= 1");
  if (t < 0) fail(ErrorCategory::argument, "area must be >= 0");
  // Power sum p_n = sum_{k=0}^{min(n,N)-1} (-1)^k chi_{(n-k,1^k)}.
  double acc = 0.0;
  const int rows = std::min(n, N);
  for (int k = 0; k < rows; ++k) {
    HighestWeight hook = HighestWeight::zero(N);
    hook.entries[0] = n - k;
    for (int r = 1; r <= k; ++r) hook.entries[r] = 1;
    const double d = to_double(dimension(hook));
    const double c2 = to_double(casimir(hook));
    acc += (k % 2 == 0 ? 1.0 : -1.0) * d * std::exp(-c2 * t / 2.0);
  }
  return acc / N;
}

TruncatedSum partition_function_sphere(int N, double T, double cutoff,
                                       const WeightEnumOptions& opts) {
  return partition_function_genus(N, 0, T, cutoff, opts);
}

TruncatedSum partition_function_genus(int N, int genus, double total_area, double cutoff,
                                      const WeightEnumOptions& opts) {
  if (total_area <= 0) fail(ErrorCategory::argument, "total area must be positive");
  if (genus < 0) fail(ErrorCategory::argument, "genus must be >= 0");
  auto ws = enumerate_weights(N, cutoff, opts);
  // Splitting the exponential bounds the tail:
  //   sum_{c2 > c} e^{-c2 T/2} |d|^p <= e^{-c T/4} sum_all e^{-c2 T/4} |d|^p,
  // and the half-rate sum is estimated on the enumerated set.
  double total = 0.0, half_rate = 0.0;
  for (const auto& w : ws) {
    const double d = to_double(dimension(w));
    const double dp = std::pow(d, 2.0 - 2.0 * genus);
    const double c2 = to_double(casimir(w));
    total += dp * std::exp(-c2 * total_area / 2.0);
    half_rate += dp * std::exp(-c2 * total_area / 4.0);
  }
  TruncatedSum out;
  out.value = total;
  out.tail_estimate = std::exp(-cutoff * total_area / 4.0) * half_rate;
  out.cutoff = cutoff;
  out.terms = ws.size();
  return out;
}

double sphere_simple_loop_expectation(int N, double T, double t, double cutoff, double tol) {
  if (!(t > 0) || !(t < T))
    fail(ErrorCategory::argument, "need 0 < t < T for a sphere loop");
  if (cutoff <= 0) {
    // sized so that e^{-cutoff T/4} * (half-rate sum) clears the tolerance
    cutoff = 4.0 * (-std::log(tol) + 3.0 + 2.0 * N) / T + 4.0 * N + 8.0;
  }
  auto ws = enumerate_weights(N, cutoff);

  double Z = 0.0, num = 0.0;
  for (const auto& w : ws) {
    const double d = to_double(dimension(w));
    const double c2 = to_double(casimir(w));
    const double weight = std::exp(-c2 * T / 2.0) * d * d;
    Z += weight;

    // f1 via the shifted-weight product formula: contributions of mu with
    // lambda -> mu, exponent (c2(mu)-c2(lambda)) = (2 l_i + 1)/N.
    auto sw = shifted(w);
    double f1 = 0.0;
    for (int i = 0; i < N; ++i) {
      if (!(i == 0 || w.entries[i - 1] > w.entries[i])) continue;
      double prod = 1.0;
      for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        // l_i - l_j is integral: (doubled difference)/2.
        const double diff = 0.5 * (sw.doubled_entries[i] - sw.doubled_entries[j]);
        prod *= 1.0 + 1.0 / diff;
      }
      const double dc2 = (sw.doubled_entries[i] + 1.0) / N;
      f1 += std::exp(-dc2 * (T - t) / 2.0) * prod;
    }
    num += weight * f1;
  }
  // Tail control: compare against the partition tail estimate.
  auto zsum = partition_function_sphere(N, T, cutoff);
  if (zsum.tail_estimate > tol * std::abs(zsum.value))
    fail(ErrorCategory::cutoff,
         "cutoff " + std::to_string(cutoff) + " insufficient: estimated tail " +
             std::to_string(zsum.tail_estimate));
  // The character integral against tr = Tr/N contributes 1/N per Pieri edge.
  return num / (N * Z);
}

namespace {

using BigFloat = boost::multiprecision::cpp_bin_float_50;
using BigComplex = boost::multiprecision::cpp_complex_50;

template <typename C>
C det_gauss(std::vector<std::vector<C>> m) {
  const std::size_t n = m.size();
  C det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    auto mag = [](const C& z) { return abs(z); };
    for (std::size_t r = c + 1; r < n; ++r)
      if (mag(m[r][c]) > mag(m[piv][c])) piv = r;
    if (m[piv][c] == C(0)) return C(0);
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      C f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return det;
}

// Weyl character of U(N) at angles theta: ratio of generalized Vandermonde
// determinants over the shifted exponents l_k' = lambda_k + N - k.
double character_at(const HighestWeight& w, const std::vector<double>& theta) {
  const int N = w.rank();
  std::vector<std::vector<BigComplex>> num(N, std::vector<BigComplex>(N));
  std::vector<std::vector<BigComplex>> den(N, std::vector<BigComplex>(N));
  for (int j = 0; j < N; ++j) {
    for (int k = 0; k < N; ++k) {
      const long long ln = w.entries[k] + (N - 1 - k);
      const long long ld = N - 1 - k;
      BigFloat th(theta[j]);
      num[j][k] = BigComplex(cos(th * ln), sin(th * ln));
      den[j][k] = BigComplex(cos(th * ld), sin(th * ld));
    }
  }
  BigComplex dn = det_gauss(num);
  BigComplex dd = det_gauss(den);
  if (dd == BigComplex(0))
    fail(ErrorCategory::numeric, "coincident eigenangles beyond perturbation tolerance");
  BigComplex q = dn / dd;
  return q.real().convert_to<double>();
}

bool has_collision(const std::vector<double>& theta) {
  for (std::size_t i = 0; i < theta.size(); ++i)
    for (std::size_t j = i + 1; j < theta.size(); ++j) {
      double d = std::remainder(theta[i] - theta[j], 2 * M_PI);
      if (std::abs(d) < 1e-6) return true;
    }
  return false;
}

}  // namespace

double heat_kernel_density(double time, const std::vector<double>& eigenangles, double cutoff) {
  if (time <= 0) fail(ErrorCategory::argument, "heat kernel needs t > 0");
  const int N = static_cast<int>(eigenangles.size());
  if (N < 1) fail(ErrorCategory::argument, "need at least one eigenangle");
  auto ws = enumerate_weights(N, cutoff);

  auto eval = [&](const std::vector<double>& th) {
    double acc = 0.0;
    for (const auto& w : ws) {
      const double d = to_double(dimension(w));
      const double c2 = to_double(casimir(w));
      acc += std::exp(-c2 * time / 2.0) * d * character_at(w, th);
    }
    return acc;
  };

  if (!has_collision(eigenangles)) return eval(eigenangles);

  // Perturb by distinct multiples of 1e-7 and Richardson-extrapolate the
  // O(delta) error away.
  auto perturbed = [&](double delta) {
    std::vector<double> th = eigenangles;
    for (int i = 0; i < N; ++i) th[i] += delta * (i + 1);
    return eval(th);
  };
  const double f1 = perturbed(1e-7);
  const double f2 = perturbed(0.5e-7);
  return 2.0 * f2 - f1;
}

}  // namespace ym2::rep
