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

#include "opml/labels.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "opml/errors.h"

namespace opml {
namespace {

namespace fs = std::filesystem;

using S = LabelState;

Dataset FromTruthRows(const std::vector<std::vector<int>>& rows) {
  Dataset d;
  const std::size_t n = rows.size(), l = rows.front().size();
  d.features = Matrix(n, 1);
  d.truth = BinaryMatrix(n, l);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < l; ++j) d.truth(i, j) = static_cast<std::uint8_t>(rows[i][j]);
  d.observed = FullObservation(d.truth);
  return d;
}

fs::path TempFile(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "opml_labels_test";
  fs::create_directories(dir);
  return dir / name;
}

TEST_CASE("to_single_positive examples") {
  Rng rng(1);
  const Dataset one = to_single_positive(FromTruthRows({{1, 0, 0}}), rng);
  CHECK(one.observed(0, 0) == S::kPositive);
  CHECK(one.observed(0, 1) == S::kUnknown);
  CHECK(one.observed(0, 2) == S::kUnknown);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng r(seed);
    const Dataset two = to_single_positive(FromTruthRows({{1, 1, 0}}), r);
    CHECK(two.observed.CountInRow(0, S::kPositive) == 1);
    CHECK(two.observed.CountInRow(0, S::kUnknown) == 2);
    CHECK(two.observed(0, 2) == S::kUnknown);
    CHECK(two.truth == FromTruthRows({{1, 1, 0}}).truth);
  }
}

TEST_CASE("to_single_positive picks positives uniformly") {
  std::vector<std::vector<int>> rows(10000, {1, 1, 0, 0});
  const Dataset full = FromTruthRows(rows);
  Rng rng(0);
  const Dataset sp = to_single_positive(full, rng);
  std::size_t kept0 = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) kept0 += sp.observed(i, 0) == S::kPositive;
  const double frac = static_cast<double>(kept0) / rows.size();
  CHECK(frac >= 0.49);
  CHECK(frac <= 0.51);
  CHECK(sp.observed.IsSinglePositive());

  // The band above is about two standard errors wide, so check the sampler
  // over many seeds too: the pooled fraction has standard error 5e-4.
  double pooled = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng r(seed);
    const Dataset s = to_single_positive(full, r);
    for (std::size_t i = 0; i < rows.size(); ++i) pooled += s.observed(i, 0) == S::kPositive;
  }
  CHECK(std::abs(pooled / (100.0 * rows.size()) - 0.5) < 2.5e-3);
}

TEST_CASE("to_single_positive rejects empty truth rows") {
  Dataset d = FromTruthRows({{1, 0}, {0, 0}});
  Rng rng(0);
  try {
    to_single_positive(d, rng);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("to_single_positive is deterministic under the seed") {
  Rng g(4);
  const Dataset full = generate_synthetic({200, 4, 6, 3.0, 1.0}, g);
  Rng a(9), b(9);
  CHECK(to_single_positive(full, a) == to_single_positive(full, b));
}

TEST_CASE("assume_negative examples") {
  TriStateLabels y(2, 3);
  y(0, 0) = S::kPositive;
  const TriStateLabels an = assume_negative(y);
  CHECK(an(0, 0) == S::kPositive);
  CHECK(an(0, 1) == S::kNegative);
  CHECK(an(0, 2) == S::kNegative);
  for (std::size_t j = 0; j < 3; ++j) CHECK(an(1, j) == S::kNegative);
}

TEST_CASE("assume_negative introduces exactly the hidden positives as false negatives") {
  Rng g(17);
  const Dataset full = generate_synthetic({500, 8, 10, 3.0, 1.0}, g);
  Rng r(3);
  const Dataset sp = to_single_positive(full, r);
  const Dataset an = assume_negative(sp);
  for (std::size_t i = 0; i < an.n_samples(); ++i) {
    std::size_t false_neg = 0;
    for (std::size_t j = 0; j < an.n_labels(); ++j)
      false_neg += an.observed(i, j) == S::kNegative && an.truth(i, j) == 1;
    REQUIRE(false_neg == an.truth.RowCount(i) - sp.observed.CountInRow(i, S::kPositive));
    REQUIRE(an.observed.CountInRow(i, S::kPositive) == sp.observed.CountInRow(i, S::kPositive));
    REQUIRE(an.observed.CountInRow(i, S::kUnknown) == 0);
  }
}

TEST_CASE("generate_synthetic statistics") {
  Rng rng(31);
  SyntheticConfig cfg;
  cfg.n_samples = 10000;
  const Dataset d = generate_synthetic(cfg, rng);
  const double mean = static_cast<double>(d.truth.Total()) / cfg.n_samples;
  CHECK(std::abs(mean - 3.0) <= 0.2);
  CHECK(d.n_features() == 32);
  CHECK(d.n_labels() == 16);
  CHECK(d.observed == FullObservation(d.truth));
  CHECK_NOTHROW(d.Validate());
}

TEST_CASE("generate_synthetic default config has no empty rows or columns") {
  Rng rng(5);
  const Dataset d = generate_synthetic(SyntheticConfig{}, rng);
  for (std::size_t i = 0; i < d.n_samples(); ++i) REQUIRE(d.truth.RowCount(i) >= 1);
  for (std::size_t j = 0; j < d.n_labels(); ++j) CHECK(d.truth.ColumnCount(j) >= 1);
}

TEST_CASE("generate_synthetic is deterministic and validates its config") {
  Rng a(12), b(12), c(13);
  const SyntheticConfig cfg{300, 6, 5, 2.0, 0.5};
  const Dataset da = generate_synthetic(cfg, a);
  CHECK(da == generate_synthetic(cfg, b));
  CHECK_FALSE(da == generate_synthetic(cfg, c));

  Rng r(0);
  CHECK_THROWS_AS(generate_synthetic({10, 2, 1, 1.0, 1.0}, r), DomainError);
  CHECK_THROWS_AS(generate_synthetic({10, 2, 4, 0.5, 1.0}, r), DomainError);
  CHECK_THROWS_AS(generate_synthetic({10, 2, 4, 2.0, -1.0}, r), DomainError);
  CHECK_THROWS_AS(generate_synthetic({0, 2, 4, 2.0, 1.0}, r), DomainError);
}

TEST_CASE("split_train_validation partitions the index set") {
  Rng rng(6);
  const SplitIndices s = split_train_validation(100, 0.2, rng);
  CHECK(s.train.size() == 80);
  CHECK(s.validation.size() == 20);
  std::vector<int> seen(100, 0);
  for (auto i : s.train) ++seen[i];
  for (auto i : s.validation) ++seen[i];
  for (int v : seen) CHECK(v == 1);
  CHECK(std::is_sorted(s.train.begin(), s.train.end()));
  CHECK(std::is_sorted(s.validation.begin(), s.validation.end()));
  CHECK_THROWS_AS(split_train_validation(10, 1.0, rng), DomainError);
}

TEST_CASE("read_jsonl minimal file") {
  const fs::path p = TempFile("minimal.jsonl");
  std::ofstream(p) << "{\"n_labels\":1,\"n_features\":1}\n"
                   << "{\"x\":[0.0],\"pos\":[0],\"neg\":[],\"truth\":[0]}\n";
  const Dataset d = read_jsonl(p);
  CHECK(d.n_samples() == 1);
  CHECK(d.n_features() == 1);
  CHECK(d.observed(0, 0) == S::kPositive);
  CHECK(d.truth(0, 0) == 1);
}

std::string ReadJsonlError(const std::string& body) {
  const fs::path p = TempFile("bad.jsonl");
  std::ofstream(p) << body;
  try {
    read_jsonl(p);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

TEST_CASE("read_jsonl errors carry line numbers") {
  const std::string header = "{\"n_labels\":2,\"n_features\":2}\n";
  CHECK(ReadJsonlError("{\"n_labels\":2,\"n_features\":2}\n"
                       "{\"x\":[0.0],\"pos\":[0],\"neg\":[],\"truth\":[0]}\n")
            .find("line 2") != std::string::npos);
  CHECK(ReadJsonlError(header + "{\"x\":[0.0,1.0],\"pos\":[0],\"neg\":[],\"truth\":[0]}\n" +
                       "{\"x\":[0.0],\"pos\":[0],\"neg\":[],\"truth\":[0]}\n")
            .find("line 3") != std::string::npos);
  CHECK(ReadJsonlError(header + "{\"x\":[0.0,1.0],\"pos\":[5],\"neg\":[],\"truth\":[0]}\n")
            .find("line 2") != std::string::npos);
  CHECK(ReadJsonlError(header + "{\"x\":[0.0,1.0],\"pos\":[0],\"neg\":[0],\"truth\":[0]}\n")
            .find("line 2") != std::string::npos);
  CHECK(ReadJsonlError(header + "{\"x\":[0.0,1.0],\"pos\":[1,0],\"neg\":[],\"truth\":[0,1]}\n")
            .find("line 2") != std::string::npos);
  CHECK(ReadJsonlError(header + "not json\n").find("line 2") != std::string::npos);
  CHECK_FALSE(ReadJsonlError(header + "{\"x\":[0.0,1.0],\"pos\":[1],\"neg\":[],\"truth\":[0]}\n")
                  .empty());
}

TEST_CASE("JSONL round-trip is exact") {
  Rng rng(77);
  const Dataset full = generate_synthetic({100, 8, 4, 2.0, 1.3}, rng);
  Rng r(1);
  Dataset mixed = to_single_positive(full, r);
  // Mix in some observed negatives so every state is exercised.
  for (std::size_t i = 0; i < mixed.n_samples(); i += 3)
    for (std::size_t j = 0; j < mixed.n_labels(); ++j)
      if (mixed.truth(i, j) == 0 && j % 2 == 0) mixed.observed(i, j) = S::kNegative;
  const fs::path p = TempFile("roundtrip.jsonl");
  write_jsonl(mixed, p);
  CHECK(read_jsonl(p) == mixed);
  write_jsonl(full, p);
  CHECK(read_jsonl(p) == full);
}

TEST_CASE("Dataset::Validate") {
  Dataset d = FromTruthRows({{1, 0}});
  CHECK_NOTHROW(d.Validate());
  d.observed(0, 1) = S::kPositive;
  CHECK_THROWS_AS(d.Validate(), DataError);
  Dataset e = FromTruthRows({{1, 0}});
  e.truth(0, 0) = 0;
  e.observed(0, 0) = S::kUnknown;
  CHECK_THROWS_AS(e.Validate(), DataError);
}

}  // namespace
}  // namespace opml
