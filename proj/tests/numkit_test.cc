/*
 * Copyright 2026 The OPML Lab Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "opml/numkit.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "opml/errors.h"
#include "test_util.h"

namespace opml {
namespace {

using testing::RandomMatrix;

TEST_CASE("stable_log_sum examples") {
  const std::vector<double> zero{0.0};
  CHECK(stable_log_sum(1.0, zero) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const std::vector<double> zeros{0.0, 0.0};
  CHECK(stable_log_sum(0.0, zeros) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  // Extended-precision reference for log(1 + e^1000).
  const long double reference = 1000.0L + std::log1p(std::exp(-1000.0L));
  const std::vector<double> big{1000.0};
  const double got = stable_log_sum(1.0, big);
  CHECK(std::isfinite(got));
  CHECK(got == doctest::Approx(static_cast<double>(reference)).epsilon(1e-15));

  CHECK_THROWS_AS(stable_log_sum(0.0, {}), DomainError);
  CHECK_THROWS_AS(stable_log_sum(-1.0, zero), DomainError);
  CHECK(stable_log_sum(2.5, {}) == doctest::Approx(std::log(2.5)));
}

TEST_CASE("stable_log_sum matches the naive form and is monotone") {
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng_uniform_index(rng, 8);
    std::vector<double> terms(n);
    for (double& t : terms) t = rng.Uniform(-30.0, 30.0);
    const double constant = trial % 3 == 0 ? 0.0 : rng.Uniform(0.0, 5.0);
    double naive = constant;
    for (double t : terms) naive += std::exp(t);
    naive = std::log(naive);
    const double got = stable_log_sum(constant, terms);
    REQUIRE(std::abs(got - naive) <= 1e-12 * std::max(1.0, std::abs(naive)));

    std::vector<double> shuffled = terms;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(stable_log_sum(constant, shuffled) == doctest::Approx(got).epsilon(1e-15));

    // Non-decreasing in every input; strictly increasing in the dominant term.
    std::vector<double> bumped = terms;
    bumped[rng_uniform_index(rng, n)] += 0.5;
    CHECK(stable_log_sum(constant, bumped) >= got);
    CHECK(stable_log_sum(constant + 1.0, terms) >= got);
    std::vector<double> top = terms;
    *std::max_element(top.begin(), top.end()) += 0.5;
    CHECK(stable_log_sum(constant, top) > got);
  }
}

TEST_CASE("stable_weighted_log_sum drops zero weights") {
  const std::vector<double> terms{800.0, 1.0};
  const std::vector<double> weights{0.0, 0.5};
  CHECK(stable_weighted_log_sum(2.0, terms, weights) ==
        doctest::Approx(std::log(2.0 + 0.5 * std::exp(1.0))));
  const std::vector<double> ones{1.0, 1.0};
  const std::vector<double> small{0.3, -2.0};
  CHECK(stable_weighted_log_sum(1.5, small, ones) == stable_log_sum(1.5, small));
  CHECK_THROWS_AS(stable_weighted_log_sum(0.0, terms, std::vector<double>{0.0, 0.0}),
                  DomainError);
}

TEST_CASE("softplus and sigmoid are stable at the extremes") {
  CHECK(softplus(1000.0) == 1000.0);
  CHECK(softplus(-1000.0) == 0.0);
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(-1000.0) == 0.0);
  CHECK(sigmoid(1000.0) == 1.0);
}

TEST_CASE("logdet_psd examples") {
  CHECK(logdet_psd(Matrix::Identity(3), 0.0) == doctest::Approx(0.0));
  Matrix two = Matrix::Identity(2);
  for (double& v : two.data()) v *= 2.0;
  CHECK(logdet_psd(two, 0.0) == doctest::Approx(2.0 * std::log(2.0)));

  const double eps = 1e-6;
  const Matrix rank1(2, 2, {1.0, 1.0, 1.0, 1.0});
  CHECK(logdet_psd(rank1, eps) == doctest::Approx(std::log((2.0 + eps) * eps)).epsilon(1e-9));

  CHECK_THROWS_AS(logdet_psd(rank1, 0.0), NumericalError);
  CHECK_THROWS_AS(logdet_psd(Matrix(2, 2, {1.0, 0.5, 0.4, 1.0}), 0.0), ContractError);
  CHECK_THROWS_AS(logdet_psd(Matrix(2, 3), 0.0), ContractError);
}

TEST_CASE("logdet_psd error names the pivot") {
  const Matrix m(3, 3, {1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0});
  try {
    logdet_psd(m, 0.0);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("pivot 2") != std::string::npos);
  }
}

TEST_CASE("logdet_psd agrees with a Jacobi eigenvalue oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 2 + rng_uniform_index(rng, 6);
    const std::size_t cols = 1 + rng_uniform_index(rng, 5);
    const Matrix x = RandomMatrix(rows, cols, -1.0, 1.0, rng);
    const Matrix gram = MatTMul(x, x);
    const double eps = 1e-3;
    double oracle = 0.0;
    for (double ev : testing::SymmetricEigenvalues(gram)) oracle += std::log(ev + eps);
    CHECK(logdet_psd(gram, eps) == doctest::Approx(oracle).epsilon(1e-9));

    // Symmetric permutation invariance.
    std::vector<std::size_t> perm(cols);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::reverse(perm.begin(), perm.end());
    Matrix permuted(cols, cols);
    for (std::size_t i = 0; i < cols; ++i)
      for (std::size_t j = 0; j < cols; ++j) permuted(i, j) = gram(perm[i], perm[j]);
    CHECK(logdet_psd(permuted, eps) == doctest::Approx(logdet_psd(gram, eps)).epsilon(1e-12));
  }
}

TEST_CASE("finite_diff_grad examples") {
  const Matrix x(1, 2, {1.0, 2.0});
  const Matrix g = finite_diff_grad(
      [](const Matrix& m) {
        double s = 0.0;
        for (double v : m.data()) s += v * v;
        return s;
      },
      x);
  CHECK(g(0, 0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(g(0, 1) == doctest::Approx(4.0).epsilon(1e-8));

  const Matrix zero(1, 1, {0.0});
  const Matrix gs = finite_diff_grad(
      [](const Matrix& m) { return stable_log_sum(1.0, m.data()); }, zero);
  CHECK(std::abs(gs(0, 0) - 0.5) < 1e-8);

  CHECK_THROWS_AS(finite_diff_grad([](const Matrix& m) { return m(0, 0) > 0 ? NAN : 0.0; }, zero),
                  NumericalError);
}

TEST_CASE("finite_diff_grad of logdet matches 2 X (X^T X + eps I)^{-1}") {
  Rng rng(5);
  const Matrix x = RandomMatrix(4, 3, -1.0, 1.0, rng);
  const double eps = 1e-2;
  const Matrix numeric = finite_diff_grad(
      [eps](const Matrix& m) { return logdet_psd(MatTMul(m, m), eps); }, x);
  Matrix shifted = MatTMul(x, x);
  for (std::size_t i = 0; i < 3; ++i) shifted(i, i) += eps;
  Matrix analytic = MatMul(x, testing::Inverse(shifted));
  for (double& v : analytic.data()) v *= 2.0;
  CHECK(testing::ToleranceRatio(analytic, numeric, 1e-6, 1e-9) <= 1.0);
}

TEST_CASE("Cholesky solve recovers the right-hand side") {
  Rng rng(3);
  const Matrix x = RandomMatrix(6, 4, -1.0, 1.0, rng);
  Matrix a = MatTMul(x, x);
  for (std::size_t i = 0; i < 4; ++i) a(i, i) += 0.1;
  const Matrix b = RandomMatrix(4, 2, -1.0, 1.0, rng);
  const Matrix sol = Cholesky(a).Solve(b);
  const Matrix back = MatMul(a, sol);
  CHECK(testing::ToleranceRatio(back, b, 1e-10, 1e-12) <= 1.0);
}

TEST_CASE("splitmix64 reference stream") {
  // Published reference outputs of splitmix64.
  Rng zero(0);
  CHECK(zero.Next() == 0xE220A8397B1DCDAFULL);
  CHECK(zero.Next() == 0x6E789E6AA1B965F4ULL);
  CHECK(zero.Next() == 0x06C45D188009454FULL);
  Rng other(1234567);
  CHECK(other.Next() == 6457827717110365317ULL);
}

TEST_CASE("rng_uniform_index") {
  Rng rng(0);
  CHECK(rng_uniform_index(rng, 1) == 0);
  CHECK_THROWS_AS(rng_uniform_index(rng, 0), DomainError);

  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(rng_uniform_index(a, 37) == rng_uniform_index(b, 37));

  Rng chi(42);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 100000; ++i) ++counts[rng_uniform_index(chi, 10)];
  const double sigma = std::sqrt(100000 * 0.1 * 0.9);
  for (int c : counts) CHECK(std::abs(c - 10000) < 5.0 * sigma);
}

TEST_CASE("Rng derived draws") {
  Rng rng(8);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double g = rng.Gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sq / n - 1.0) < 0.05);

  double poisson = 0.0;
  for (int i = 0; i < n; ++i) poisson += static_cast<double>(rng.Poisson(2.0));
  CHECK(std::abs(poisson / n - 2.0) < 0.05);
}

TEST_CASE("Matrix rejects non-finite data and bad shapes") {
  CHECK_THROWS_AS(Matrix(1, 2, std::vector<double>{1.0, NAN}), DomainError);
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1.0}), ContractError);
  const Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  const Matrix b(3, 1, {1, 0, -1});
  CHECK(MatMul(a, b) == Matrix(2, 1, {-2, -2}));
  CHECK(MatTMul(a, a) == MatMul(a.Transpose(), a));
}

}  // namespace
}  // namespace opml
