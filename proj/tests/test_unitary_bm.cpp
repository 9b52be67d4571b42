#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "ym2/errors.hpp"
#include "ym2/unitary_bm.hpp"
#include "ym2/util.hpp"

using namespace ym2;
using namespace ym2::ubm;

namespace {

bool within(double got, double expect, double se, double k) {
  return std::abs(got - expect) <= k * std::max(se, 1e-12);
}

}  // namespace

TEST_SUITE_BEGIN("unitary_bm");

TEST_CASE("biane-rains moments") {
  for (double t : {0.0, 0.4, 1.0, 3.0}) {
    CHECK(biane_rains_moment(1, t) == doctest::Approx(std::exp(-t / 2)).epsilon(1e-14));
    CHECK(biane_rains_moment(2, t) ==
          doctest::Approx(std::exp(-t) * (1 - t)).epsilon(1e-13));
    CHECK(biane_rains_moment(3, t) ==
          doctest::Approx(std::exp(-1.5 * t) * (1 - 3 * t + 1.5 * t * t)).epsilon(1e-13));
  }
  CHECK(biane_rains_moment(5, 0.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(biane_rains_moment(0, 1.0), Error);
}

TEST_CASE("gaussian algebra element moments") {
  // dK A dK = -tr(A) dt   and   dK tr(A dK) = -A/N^2 dt
  const int N = 3;
  RandomStream rng(99, 0);
  Matrix A(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      A(i, j) = std::complex<double>(rng.next_gaussian(), rng.next_gaussian());

  const std::size_t draws = 1000000;
  Matrix acc1 = Matrix::Zero(N, N), acc2 = Matrix::Zero(N, N);
  double norm2_sum = 0;
  for (std::size_t k = 0; k < draws; ++k) {
    RandomStream g(7, k);
    const Matrix G = gaussian_algebra_element(N, g);
    acc1 += G * A * G;
    acc2 += G * (A * G).trace() / double(N);
    norm2_sum += (G * G.adjoint()).trace().real();
  }
  acc1 /= double(draws);
  acc2 /= double(draws);
  const Matrix expect1 = -(A.trace() / double(N)) * Matrix::Identity(N, N);
  const Matrix expect2 = -A / double(N * N);
  // entrywise scale ~ 1/N, sample error ~ few/sqrt(draws)
  const double se = 4.0 / std::sqrt(double(draws));
  CHECK((acc1 - expect1).cwiseAbs().maxCoeff() < 4 * se);
  CHECK((acc2 - expect2).cwiseAbs().maxCoeff() < 4 * se);
  // <G,G> has mean N^2 under the chosen normalization of u(N)
  CHECK(norm2_sum / draws == doctest::Approx(N).epsilon(0.01));
}

TEST_CASE("brownian motion basics") {
  RandomStream rng(5, 0);
  const Matrix U0 = sample_unitary_bm(3, 0.0, 1e-3, rng);
  CHECK((U0 - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(sample_unitary_bm(3, 0.5, 0.7, rng), Error);

  // unitarity stays at machine precision along a long path
  Matrix U = Matrix::Identity(4, 4);
  RandomStream rng2(17, 3);
  advance_unitary_bm(U, 5.0, 1e-2, rng2);
  CHECK(unitarity_defect(U) <= 1e-10);
}

TEST_CASE("mean trace of U_t matches the character value") {
  const int N = 3;
  const std::size_t samples = 20000;
  std::vector<double> vals(samples);
  parallel_for(samples, [&](std::size_t s) {
    RandomStream rng(21, s);
    vals[s] = (sample_unitary_bm(N, 1.0, 1e-3, rng).trace() / double(N)).real();
  });
  const double mean = pairwise_sum(vals) / samples;
  double var = 0;
  for (double v : vals) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / samples / (samples - 1));
  CHECK(within(mean, std::exp(-0.5), se, 4.0));
}

TEST_CASE("haar unitary is uniform on traces") {
  const std::size_t samples = 20000;
  std::vector<double> re(samples);
  double defect = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    RandomStream rng(1234, s);
    const Matrix U = haar_unitary(3, rng);
    re[s] = (U.trace() / 3.0).real();
    defect = std::max(defect, unitarity_defect(U));
  }
  CHECK(defect < 1e-12);
  const double mean = pairwise_sum(re) / samples;
  // E tr = 0 for Haar; Var(Tr) = 1 so se = 1/(3 sqrt(n))
  CHECK(std::abs(mean) < 4.0 / (3.0 * std::sqrt(double(samples))));
}

TEST_CASE("word estimator: heart word") {
  // tr(V_t^2 U_s) with s = t = 0.5, N = 3
  WordSpec w;
  w.letters = {{0, "t", 1}, {0, "t", 1}, {1, "s", 1}};
  w.trace_groups = {{0, 3}};
  auto est = estimate_wilson_word(w, {{"t", 0.5}, {"s", 0.5}}, 3, 20000, 1e-3, 42);
  const double expect =
      std::exp(-0.25 - 0.5) * (std::cosh(0.5 / 3) - 3 * std::sinh(0.5 / 3));
  CHECK(within(est.mean, expect, est.stderror, 4.0));
}

TEST_CASE("word estimator: product of two traces") {
  // tr(H_v^{-1}) tr(H_v) -> (1/N^2)(1 - e^-v) + e^-v
  WordSpec w;
  w.letters = {{0, "v", -1}, {0, "v", 1}};
  w.trace_groups = {{0, 1}, {1, 2}};
  const double v = 0.8;
  const int N = 3;
  auto est = estimate_wilson_word(w, {{"v", v}}, N, 20000, 1e-3, 11);
  const double expect = (1 - std::exp(-v)) / (N * N) + std::exp(-v);
  CHECK(within(est.mean, expect, est.stderror, 4.0));
}

TEST_CASE("word estimator edge cases") {
  WordSpec empty;
  auto est = estimate_wilson_word(empty, {}, 3, 100, 1e-3, 1);
  CHECK(est.mean == 1.0);
  CHECK(est.stderror == 0.0);

  WordSpec zero;
  zero.letters = {{0, "a", 1}, {1, "b", 1}};
  zero.trace_groups = {{0, 2}};
  auto est0 = estimate_wilson_word(zero, {{"a", 0.0}, {"b", 0.0}}, 3, 100, 1e-3, 1);
  CHECK(est0.mean == 1.0);
  CHECK(est0.stderror == 0.0);

  CHECK_THROWS_AS(estimate_wilson_word(zero, {{"a", 1.0}}, 3, 10, 1e-3, 1), Error);
}

TEST_CASE("determinism across thread counts") {
  WordSpec w;
  w.letters = {{0, "t", 1}, {0, "t", 1}, {1, "s", 1}};
  w.trace_groups = {{0, 3}};
  const std::map<std::string, double> times{{"t", 0.3}, {"s", 0.4}};

  setenv("YM2D_THREADS", "1", 1);
  auto a = estimate_wilson_word(w, times, 2, 4000, 1e-2, 77);
  setenv("YM2D_THREADS", "3", 1);
  auto b = estimate_wilson_word(w, times, 2, 4000, 1e-2, 77);
  unsetenv("YM2D_THREADS");
  CHECK(a.mean == b.mean);
  CHECK(a.stderror == b.stderror);

  auto c = estimate_wilson_word(w, times, 2, 4000, 1e-2, 78);
  CHECK(a.mean != c.mean);  // different seed, different stream
}

TEST_CASE("gauge covariance at word level") {
  // conjugating one independent factor by a fixed unitary preserves the law
  WordSpec w;
  w.letters = {{0, "t", 1}, {0, "t", 1}, {1, "s", 1}};
  w.trace_groups = {{0, 3}};
  const std::map<std::string, double> times{{"t", 0.5}, {"s", 0.5}};
  const int N = 3;
  RandomStream gr(3000, 0);
  const Matrix g = haar_unitary(N, gr);

  auto base = estimate_wilson_word(w, times, N, 20000, 1e-3, 5);
  auto conj = estimate_word_functional(
      w, times, N, 20000, 1e-3, 5,
      [&](const std::map<std::pair<int, std::string>, Matrix>& vals) {
        const Matrix V = g * vals.at({0, "t"}) * g.adjoint();
        const Matrix U = vals.at({1, "s"});
        return ((V * V * U).trace() / double(N)).real();
      });
  const double se = std::sqrt(base.stderror * base.stderror + conj.stderror * conj.stderror);
  CHECK(std::abs(base.mean - conj.mean) <= 4 * se);
}

TEST_CASE("eight word against the four-parameter closed form") {
  // tr(G_u^{-1} Y_s H_v^{-1} G_u Z_t H_v), all times 0.3, N = 3
  WordSpec w;
  w.letters = {{0, "u", -1}, {1, "s", 1}, {2, "v", -1},
               {0, "u", 1},  {3, "t", 1}, {2, "v", 1}};
  w.trace_groups = {{0, 6}};
  const double s = 0.3, t = 0.3, u = 0.3, v = 0.3;
  const int N = 3;
  auto est = estimate_wilson_word(w, {{"s", s}, {"t", t}, {"u", u}, {"v", v}}, N, 20000,
                                  1e-3, 1001);
  const double expect =
      std::exp(-0.5 * (s + t)) *
      (std::exp(-u) + std::exp(-v) - std::exp(-(u + v)) +
       (1.0 - std::exp(-u)) * (1.0 - std::exp(-v)) / double(N * N));
  CHECK(within(est.mean, expect, est.stderror, 4.0));
}

TEST_SUITE_END();
