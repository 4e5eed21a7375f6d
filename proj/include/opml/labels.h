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

#ifndef OPML_LABELS_H_
#define OPML_LABELS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "opml/numkit.h"

namespace opml {

enum class LabelState : std::uint8_t { kUnknown = 0, kPositive = 1, kNegative = 2 };

// n_samples x n_labels matrix of observed label states.
class TriStateLabels {
 public:
  TriStateLabels() = default;
  TriStateLabels(std::size_t n_samples, std::size_t n_labels,
                 LabelState fill = LabelState::kUnknown)
      : n_samples_(n_samples),
        n_labels_(n_labels),
        states_(n_samples * n_labels, fill) {}

  std::size_t n_samples() const { return n_samples_; }
  std::size_t n_labels() const { return n_labels_; }

  LabelState& operator()(std::size_t i, std::size_t l) {
    return states_[i * n_labels_ + l];
  }
  LabelState operator()(std::size_t i, std::size_t l) const {
    return states_[i * n_labels_ + l];
  }
  std::span<const LabelState> row(std::size_t i) const {
    return {states_.data() + i * n_labels_, n_labels_};
  }

  std::size_t CountInRow(std::size_t i, LabelState s) const;
  std::size_t CountInColumn(std::size_t l, LabelState s) const;
  bool Contains(LabelState s) const;
  // Every row holds exactly one Positive and nothing else observed.
  bool IsSinglePositive() const;

  TriStateLabels SelectRows(std::span<const std::size_t> rows) const;

  friend bool operator==(const TriStateLabels&, const TriStateLabels&) = default;

 private:
  std::size_t n_samples_ = 0;
  std::size_t n_labels_ = 0;
  std::vector<LabelState> states_;
};

// Dense 0/1 matrix of ground-truth labels.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), bits_(rows * cols, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint8_t& operator()(std::size_t r, std::size_t c) { return bits_[r * cols_ + c]; }
  std::uint8_t operator()(std::size_t r, std::size_t c) const {
    return bits_[r * cols_ + c];
  }
  std::span<const std::uint8_t> row(std::size_t r) const {
    return {bits_.data() + r * cols_, cols_};
  }
  std::vector<std::uint8_t> Column(std::size_t c) const;
  std::size_t RowCount(std::size_t r) const;
  std::size_t ColumnCount(std::size_t c) const;
  std::size_t Total() const;

  BinaryMatrix SelectRows(std::span<const std::size_t> rows) const;

  friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Features, observed labels and ground truth. Truth is for evaluation only:
// the trainer never hands it to a loss.
struct Dataset {
  Matrix features;
  TriStateLabels observed;
  BinaryMatrix truth;

  std::size_t n_samples() const { return features.rows(); }
  std::size_t n_features() const { return features.cols(); }
  std::size_t n_labels() const { return truth.cols(); }

  // Throws DataError when row counts disagree, a truth row is empty, or an
  // observed Positive is not a true positive.
  void Validate() const;
  Dataset Subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Observed labels equal to the truth (full-label setting).
TriStateLabels FullObservation(const BinaryMatrix& truth);

// Keeps one uniformly chosen true positive per row (rng_uniform_index over the
// row's positives in ascending index order); everything else becomes Unknown.
Dataset to_single_positive(const Dataset& full, Rng& rng);

// Every Unknown becomes Negative.
TriStateLabels assume_negative(const TriStateLabels& labels);
Dataset assume_negative(const Dataset& sp);

struct SyntheticConfig {
  std::size_t n_samples = 3500;
  std::size_t n_features = 32;
  std::size_t n_labels = 16;
  double labels_per_sample_mean = 3.0;
  double noise_sd = 1.0;
};

// Prototype mixture generator. Draw order:
//   1. prototypes, label-major: n_labels x n_features Gaussians;
//   2. per sample: k = min(1 + Poisson(mean - 1), n_labels); k labels chosen
//      by a partial Fisher-Yates shuffle of [0, n_labels) (rng_uniform_index
//      over the remaining suffix); then n_features Gaussian noise draws.
// Features are the mean of the chosen prototypes plus noise_sd * noise. With
// noise_sd = 0 and n_features >= n_labels every label is linearly separable.
Dataset generate_synthetic(const SyntheticConfig& cfg, Rng& rng);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Seeded shuffle of [0, n) (Fisher-Yates from the back with
// rng_uniform_index); the last round(n * val_fraction) go to validation.
// Both lists are returned in ascending order.
SplitIndices split_train_validation(std::size_t n, double val_fraction, Rng& rng);

void write_jsonl(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_jsonl(const std::filesystem::path& path);

}  // namespace opml

#endif  // OPML_LABELS_H_
