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
#include <fstream>
#include <string>

#include "json.hpp"

#include "opml/errors.h"

namespace opml {

std::size_t TriStateLabels::CountInRow(std::size_t i, LabelState s) const {
  const auto r = row(i);
  return static_cast<std::size_t>(std::count(r.begin(), r.end(), s));
}

std::size_t TriStateLabels::CountInColumn(std::size_t l, LabelState s) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < n_samples_; ++i) n += (*this)(i, l) == s;
  return n;
}

bool TriStateLabels::Contains(LabelState s) const {
  return std::find(states_.begin(), states_.end(), s) != states_.end();
}

bool TriStateLabels::IsSinglePositive() const {
  for (std::size_t i = 0; i < n_samples_; ++i) {
    if (CountInRow(i, LabelState::kPositive) != 1 ||
        CountInRow(i, LabelState::kNegative) != 0) {
      return false;
    }
  }
  return true;
}

TriStateLabels TriStateLabels::SelectRows(std::span<const std::size_t> rows) const {
  TriStateLabels out(rows.size(), n_labels_);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto src = row(rows[k]);
    std::copy(src.begin(), src.end(), out.states_.begin() + k * n_labels_);
  }
  return out;
}

std::vector<std::uint8_t> BinaryMatrix::Column(std::size_t c) const {
  std::vector<std::uint8_t> col(rows_);
  for (std::size_t r = 0; r < rows_; ++r) col[r] = (*this)(r, c);
  return col;
}

std::size_t BinaryMatrix::RowCount(std::size_t r) const {
  const auto v = row(r);
  return static_cast<std::size_t>(std::count(v.begin(), v.end(), 1));
}

std::size_t BinaryMatrix::ColumnCount(std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows_; ++r) n += (*this)(r, c);
  return n;
}

std::size_t BinaryMatrix::Total() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

BinaryMatrix BinaryMatrix::SelectRows(std::span<const std::size_t> rows) const {
  BinaryMatrix out(rows.size(), cols_);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto src = row(rows[k]);
    std::copy(src.begin(), src.end(), out.bits_.begin() + k * cols_);
  }
  return out;
}

void Dataset::Validate() const {
  if (observed.n_samples() != features.rows() || truth.rows() != features.rows()) {
    throw DataError("dataset: row counts disagree (features " +
                    std::to_string(features.rows()) + ", observed " +
                    std::to_string(observed.n_samples()) + ", truth " +
                    std::to_string(truth.rows()) + ")");
  }
  if (observed.n_labels() != truth.cols()) {
    throw DataError("dataset: observed and truth label counts disagree");
  }
  for (std::size_t i = 0; i < truth.rows(); ++i) {
    if (truth.RowCount(i) == 0) {
      throw DataError("dataset: row " + std::to_string(i) + " has no true positive");
    }
    for (std::size_t l = 0; l < truth.cols(); ++l) {
      if (observed(i, l) == LabelState::kPositive && truth(i, l) == 0) {
        throw DataError("dataset: row " + std::to_string(i) +
                        " observes label " + std::to_string(l) +
                        " as positive but it is not a true positive");
      }
    }
  }
}

Dataset Dataset::Subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features = Matrix(rows.size(), n_features());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto src = features.row(rows[k]);
    std::copy(src.begin(), src.end(), out.features.row(k).begin());
  }
  out.observed = observed.SelectRows(rows);
  out.truth = truth.SelectRows(rows);
  return out;
}

TriStateLabels FullObservation(const BinaryMatrix& truth) {
  TriStateLabels labels(truth.rows(), truth.cols());
  for (std::size_t i = 0; i < truth.rows(); ++i)
    for (std::size_t l = 0; l < truth.cols(); ++l)
      labels(i, l) = truth(i, l) ? LabelState::kPositive : LabelState::kNegative;
  return labels;
}

Dataset to_single_positive(const Dataset& full, Rng& rng) {
  Dataset sp = full;
  sp.observed = TriStateLabels(full.n_samples(), full.n_labels());
  std::vector<std::size_t> positives;
  for (std::size_t i = 0; i < full.n_samples(); ++i) {
    positives.clear();
    for (std::size_t l = 0; l < full.n_labels(); ++l)
      if (full.truth(i, l)) positives.push_back(l);
    if (positives.empty()) {
      throw DataError("to_single_positive: row " + std::to_string(i) +
                      " has no positive label");
    }
    sp.observed(i, positives[rng_uniform_index(rng, positives.size())]) =
        LabelState::kPositive;
  }
  return sp;
}

TriStateLabels assume_negative(const TriStateLabels& labels) {
  TriStateLabels out = labels;
  for (std::size_t i = 0; i < out.n_samples(); ++i)
    for (std::size_t l = 0; l < out.n_labels(); ++l)
      if (out(i, l) == LabelState::kUnknown) out(i, l) = LabelState::kNegative;
  return out;
}

Dataset assume_negative(const Dataset& sp) {
  Dataset out = sp;
  out.observed = assume_negative(sp.observed);
  return out;
}

Dataset generate_synthetic(const SyntheticConfig& cfg, Rng& rng) {
  if (cfg.n_labels < 2) throw DomainError("generate_synthetic: n_labels must be >= 2");
  if (cfg.n_samples == 0 || cfg.n_features == 0) {
    throw DomainError("generate_synthetic: n_samples and n_features must be >= 1");
  }
  if (!(cfg.labels_per_sample_mean >= 1.0) ||
      !std::isfinite(cfg.labels_per_sample_mean)) {
    throw DomainError("generate_synthetic: labels_per_sample_mean must be >= 1");
  }
  if (!(cfg.noise_sd >= 0.0) || !std::isfinite(cfg.noise_sd)) {
    throw DomainError("generate_synthetic: noise_sd must be >= 0");
  }

  Matrix prototypes(cfg.n_labels, cfg.n_features);
  for (double& v : prototypes.data()) v = rng.Gaussian();

  Dataset d;
  d.features = Matrix(cfg.n_samples, cfg.n_features);
  d.truth = BinaryMatrix(cfg.n_samples, cfg.n_labels);
  std::vector<std::size_t> order(cfg.n_labels);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    const std::size_t k = std::min<std::size_t>(
        1 + rng.Poisson(cfg.labels_per_sample_mean - 1.0), cfg.n_labels);
    for (std::size_t l = 0; l < cfg.n_labels; ++l) order[l] = l;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t pick = j + rng_uniform_index(rng, cfg.n_labels - j);
      std::swap(order[j], order[pick]);
      d.truth(i, order[j]) = 1;
    }
    auto x = d.features.row(i);
    // Prototype sum in ascending label order keeps the arithmetic canonical.
    for (std::size_t l = 0; l < cfg.n_labels; ++l) {
      if (!d.truth(i, l)) continue;
      const auto p = prototypes.row(l);
      for (std::size_t f = 0; f < cfg.n_features; ++f) x[f] += p[f];
    }
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::size_t f = 0; f < cfg.n_features; ++f) {
      x[f] = x[f] * inv_k + cfg.noise_sd * rng.Gaussian();
    }
  }
  d.observed = FullObservation(d.truth);
  return d;
}

SplitIndices split_train_validation(std::size_t n, double val_fraction, Rng& rng) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw DomainError("split_train_validation: val_fraction must be in [0, 1)");
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng_uniform_index(rng, i)]);
  }
  const auto n_val = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * val_fraction));
  SplitIndices split;
  split.train.assign(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(n_val));
  split.validation.assign(perm.end() - static_cast<std::ptrdiff_t>(n_val), perm.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  return split;
}

void write_jsonl(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_jsonl: cannot open " + path.string());
  nlohmann::ordered_json header;
  header["n_labels"] = dataset.n_labels();
  header["n_features"] = dataset.n_features();
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < dataset.n_samples(); ++i) {
    nlohmann::ordered_json line;
    const auto x = dataset.features.row(i);
    line["x"] = std::vector<double>(x.begin(), x.end());
    std::vector<std::size_t> pos, neg, truth;
    for (std::size_t l = 0; l < dataset.n_labels(); ++l) {
      if (dataset.observed(i, l) == LabelState::kPositive) pos.push_back(l);
      if (dataset.observed(i, l) == LabelState::kNegative) neg.push_back(l);
      if (dataset.truth(i, l)) truth.push_back(l);
    }
    line["pos"] = pos;
    line["neg"] = neg;
    line["truth"] = truth;
    out << line.dump() << '\n';
  }
  if (!out) throw DataError("write_jsonl: write failed for " + path.string());
}

namespace {

[[noreturn]] void LineError(std::size_t line_no, const std::string& what) {
  throw DataError("line " + std::to_string(line_no) + ": " + what);
}

std::vector<std::size_t> ReadIndices(const nlohmann::json& obj, const char* key,
                                     std::size_t n_labels, std::size_t line_no) {
  if (!obj.contains(key) || !obj[key].is_array()) {
    LineError(line_no, std::string("missing array \"") + key + "\"");
  }
  std::vector<std::size_t> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number_integer()) LineError(line_no, std::string(key) + ": non-integer index");
    const auto idx = v.get<std::int64_t>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= n_labels) {
      LineError(line_no, std::string(key) + ": index " + std::to_string(idx) +
                             " out of range");
    }
    if (!out.empty() && static_cast<std::size_t>(idx) <= out.back()) {
      LineError(line_no, std::string(key) + ": indices not strictly ascending");
    }
    out.push_back(static_cast<std::size_t>(idx));
  }
  return out;
}

}  // namespace

Dataset read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_jsonl: cannot open " + path.string());

  std::string text;
  std::size_t line_no = 0;
  std::size_t n_labels = 0, n_features = 0;
  bool have_header = false;
  std::vector<double> features;
  std::vector<std::vector<std::size_t>> pos_rows, neg_rows, truth_rows;

  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      LineError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) LineError(line_no, "expected a JSON object");
    if (!have_header) {
      if (!obj.contains("n_labels") || !obj.contains("n_features") ||
          !obj["n_labels"].is_number_unsigned() ||
          !obj["n_features"].is_number_unsigned()) {
        LineError(line_no, "header must be {\"n_labels\": int, \"n_features\": int}");
      }
      n_labels = obj["n_labels"].get<std::size_t>();
      n_features = obj["n_features"].get<std::size_t>();
      have_header = true;
      continue;
    }
    if (!obj.contains("x") || !obj["x"].is_array()) LineError(line_no, "missing array \"x\"");
    if (obj["x"].size() != n_features) {
      LineError(line_no, "expected " + std::to_string(n_features) + " features, got " +
                             std::to_string(obj["x"].size()));
    }
    for (const auto& v : obj["x"]) {
      if (!v.is_number()) LineError(line_no, "x: non-numeric feature");
      const double f = v.get<double>();
      if (!std::isfinite(f)) LineError(line_no, "x: non-finite feature");
      features.push_back(f);
    }
    auto pos = ReadIndices(obj, "pos", n_labels, line_no);
    auto neg = ReadIndices(obj, "neg", n_labels, line_no);
    for (std::size_t p : pos) {
      if (std::binary_search(neg.begin(), neg.end(), p)) {
        LineError(line_no, "label " + std::to_string(p) + " is both pos and neg");
      }
    }
    pos_rows.push_back(std::move(pos));
    neg_rows.push_back(std::move(neg));
    truth_rows.push_back(ReadIndices(obj, "truth", n_labels, line_no));
  }
  if (!have_header) throw DataError("read_jsonl: missing header in " + path.string());

  const std::size_t n = pos_rows.size();
  Dataset d;
  d.features = Matrix(n, n_features, std::move(features));
  d.observed = TriStateLabels(n, n_labels);
  d.truth = BinaryMatrix(n, n_labels);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l : pos_rows[i]) d.observed(i, l) = LabelState::kPositive;
    for (std::size_t l : neg_rows[i]) d.observed(i, l) = LabelState::kNegative;
    for (std::size_t l : truth_rows[i]) d.truth(i, l) = 1;
  }
  d.Validate();
  return d;
}

}  // namespace opml
