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

#include "opml/correction.h"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "opml/errors.h"
#include "test_util.h"

namespace opml {
namespace {

using S = LabelState;
using Counts = std::vector<std::size_t>;

TEST_CASE("smoothing_weights examples") {
  const Matrix pred(1, 3, {0.8, 0.3, 0.6});
  const std::vector<double> ap{0.25, 1.0, 0.1};
  const Matrix g = smoothing_weights(pred, ap, 0.5);
  CHECK(g(0, 0) == doctest::Approx(0.4));
  CHECK(g(0, 1) == doctest::Approx(0.3));
  const Matrix flat = smoothing_weights(pred, ap, 0.0);
  CHECK(flat == pred);
  CHECK_THROWS_AS(smoothing_weights(pred, std::vector<double>{0.5}, 1.0), ContractError);
}

TEST_CASE("smoothing_weights bounds and monotonicity") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const double p = rng.Uniform(), a = rng.Uniform(), eps = rng.Uniform(0.0, 5.0);
    const double g = smoothing_weights(Matrix(1, 1, {p}), std::vector<double>{a}, eps)(0, 0);
    REQUIRE(g >= 0.0);
    REQUIRE(g <= 1.0);
    const double p2 = std::min(1.0, p + 0.1), a2 = std::min(1.0, a + 0.1);
    REQUIRE(smoothing_weights(Matrix(1, 1, {p2}), std::vector<double>{a}, eps)(0, 0) >= g);
    REQUIRE(smoothing_weights(Matrix(1, 1, {p}), std::vector<double>{a2}, eps)(0, 0) >= g);
  }
}

TEST_CASE("correction_counts examples") {
  const Counts big{1000};
  CHECK(correction_counts(500, Counts{100}, std::vector<double>{0.5}, 0.8, big) == Counts{40});
  CHECK(correction_counts(500, Counts{100}, std::vector<double>{1.0}, 0.8, big) == Counts{0});
  CHECK(correction_counts(500, Counts{100, 7}, std::vector<double>{0.2, 0.0}, 0.0,
                          Counts{1000, 1000}) == Counts{0, 0});
  // Clamped to the unknown pool.
  CHECK(correction_counts(500, Counts{100}, std::vector<double>{0.0}, 0.8, Counts{30}) ==
        Counts{30});
  // Tr_num cancels out of the product.
  CHECK(correction_counts(10000, Counts{100}, std::vector<double>{0.5}, 0.8, big) == Counts{40});
  const auto ratio = correction_ratios(500, Counts{100}, 0.8);
  CHECK(ratio[0] == doctest::Approx(0.16));
  CHECK_THROWS_AS(correction_counts(10, Counts{11}, std::vector<double>{0.5}, 0.8, big),
                  ContractError);
}

TEST_CASE("correction_counts monotone in AP and linear in label_num") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t obs = rng_uniform_index(rng, 400);
    const double ap = rng.Uniform(), ln = rng.Uniform(0.0, 2.0);
    const Counts big{100000};
    const std::size_t c = correction_counts(400, Counts{obs}, std::vector<double>{ap}, ln, big)[0];
    REQUIRE(correction_counts(400, Counts{obs}, std::vector<double>{std::min(1.0, ap + 0.05)},
                              ln, big)[0] <= c);
    REQUIRE(c == static_cast<std::size_t>(std::floor(obs * ln * (1.0 - ap))));
    const std::size_t doubled =
        correction_counts(400, Counts{obs}, std::vector<double>{ap}, 2.0 * ln, big)[0];
    REQUIRE(doubled >= 2 * c);
    REQUIRE(doubled <= 2 * c + 1);
  }
}

TEST_CASE("apply_correction examples") {
  TriStateLabels y(3, 1);
  const Matrix s(3, 1, {0.9, 0.2, 0.7});
  const CorrectionResult r = apply_correction(y, s, Counts{2});
  CHECK(r.labels(0, 0) == S::kPositive);
  CHECK(r.labels(1, 0) == S::kUnknown);
  CHECK(r.labels(2, 0) == S::kPositive);
  REQUIRE(r.flips.size() == 2);
  CHECK(r.flips[0].sample == 0);
  CHECK(r.flips[0].score == 0.9);
  CHECK(r.flips[1].sample == 2);

  CHECK(apply_correction(y, s, Counts{0}).labels == y);
  CHECK(apply_correction(y, s, Counts{0}).flips.empty());
  CHECK_THROWS_AS(apply_correction(y, s, Counts{4}), ContractError);

  // Ties resolved towards the lower sample index.
  const Matrix tied(3, 1, {0.5, 0.5, 0.5});
  const CorrectionResult t = apply_correction(y, tied, Counts{1});
  CHECK(t.labels(0, 0) == S::kPositive);
  CHECK(t.labels(1, 0) == S::kUnknown);
}

TEST_CASE("apply_correction matches a sort-and-prefix oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng_uniform_index(rng, 30), l = 1 + rng_uniform_index(rng, 6);
    TriStateLabels y(n, l);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < l; ++j) {
        const double u = rng.Uniform();
        y(i, j) = u < 0.2 ? S::kPositive : (u < 0.3 ? S::kNegative : S::kUnknown);
      }
    Matrix s(n, l);
    for (double& v : s.data()) v = static_cast<double>(rng_uniform_index(rng, 10)) / 10.0;
    Counts counts(l);
    for (std::size_t j = 0; j < l; ++j)
      counts[j] = rng_uniform_index(rng, y.CountInColumn(j, S::kUnknown) + 1);

    const CorrectionResult r = apply_correction(y, s, counts);
    TriStateLabels oracle = y;
    for (std::size_t j = 0; j < l; ++j) {
      std::vector<std::pair<double, std::size_t>> pool;
      for (std::size_t i = 0; i < n; ++i)
        if (y(i, j) == S::kUnknown) pool.emplace_back(-s(i, j), i);
      std::sort(pool.begin(), pool.end());
      for (std::size_t k = 0; k < counts[j]; ++k) oracle(pool[k].second, j) = S::kPositive;
    }
    REQUIRE(r.labels == oracle);
    std::size_t total = 0;
    for (std::size_t c : counts) total += c;
    REQUIRE(r.flips.size() == total);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < l; ++j) {
        if (y(i, j) != S::kUnknown) REQUIRE(r.labels(i, j) == y(i, j));
        REQUIRE((r.labels(i, j) != S::kNegative || y(i, j) == S::kNegative));
      }
  }
}

TEST_CASE("CorrectionConfig schedule") {
  CorrectionConfig cfg;
  CHECK(cfg.ResolvedCorrectionEpoch(20) == 8);
  CHECK(cfg.ResolvedCorrectionEpoch(3) == 2);
  CHECK_NOTHROW(cfg.Validate(20));
  cfg.correction_epoch = 1;
  CHECK_THROWS_AS(cfg.Validate(20), ConfigError);
  cfg.correction_epoch = 21;
  CHECK_THROWS_AS(cfg.Validate(20), ConfigError);
  cfg.correction_epoch = 5;
  CHECK(cfg.ResolvedCorrectionEpoch(20) == 5);
  cfg.label_num = -0.1;
  CHECK_THROWS_AS(cfg.Validate(20), ConfigError);
}

}  // namespace
}  // namespace opml
