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
#include <string>

#include "opml/errors.h"

namespace opml {

void CorrectionConfig::Validate(std::size_t total_epochs) const {
  if (!(label_num >= 0.0) || !std::isfinite(label_num)) {
    throw ConfigError("label_num must be finite and >= 0");
  }
  if (!(epsilon_power >= 0.0) || !std::isfinite(epsilon_power)) {
    throw ConfigError("epsilon_power must be finite and >= 0");
  }
  if (correction_epoch && *correction_epoch < warmup_epochs) {
    throw ConfigError("correction_epoch must be >= warmup_epochs");
  }
  if (correction_epoch && *correction_epoch > total_epochs) {
    throw ConfigError("correction_epoch exceeds the number of epochs");
  }
}

std::size_t CorrectionConfig::ResolvedCorrectionEpoch(std::size_t total_epochs) const {
  if (correction_epoch) return *correction_epoch;
  const auto by_fraction = static_cast<std::size_t>(
      std::ceil(0.4 * static_cast<double>(total_epochs)));
  return std::max(by_fraction, warmup_epochs);
}

Matrix smoothing_weights(const Matrix& pred, std::span<const double> ap,
                         double epsilon_power) {
  if (ap.size() != pred.cols()) {
    throw ContractError("smoothing_weights: one AP value per label required");
  }
  Matrix gamma(pred.rows(), pred.cols());
  for (std::size_t l = 0; l < pred.cols(); ++l) {
    const double reliability = std::pow(std::clamp(ap[l], 0.0, 1.0), epsilon_power);
    for (std::size_t i = 0; i < pred.rows(); ++i) {
      gamma(i, l) = std::clamp(pred(i, l), 0.0, 1.0) * reliability;
    }
  }
  return gamma;
}

std::vector<std::size_t> correction_counts(std::size_t tr_num,
                                           std::span<const std::size_t> obs_num,
                                           std::span<const double> ap,
                                           double label_num,
                                           std::span<const std::size_t> unknown_count) {
  if (obs_num.size() != ap.size() || unknown_count.size() != ap.size()) {
    throw ContractError("correction_counts: per-class vectors differ in length");
  }
  std::vector<std::size_t> counts(ap.size(), 0);
  for (std::size_t l = 0; l < ap.size(); ++l) {
    if (obs_num[l] > tr_num) {
      throw ContractError("correction_counts: class " + std::to_string(l) +
                          " observes more labels than training samples");
    }
    const double raw =
        static_cast<double>(obs_num[l]) * label_num * (1.0 - ap[l]);
    const double floored = std::floor(std::max(raw, 0.0));
    counts[l] = std::min(static_cast<std::size_t>(floored), unknown_count[l]);
  }
  return counts;
}

std::vector<double> correction_ratios(std::size_t tr_num,
                                      std::span<const std::size_t> obs_num,
                                      double label_num) {
  std::vector<double> ratios(obs_num.size(), 0.0);
  if (tr_num == 0) return ratios;
  for (std::size_t l = 0; l < obs_num.size(); ++l) {
    ratios[l] = static_cast<double>(obs_num[l]) / static_cast<double>(tr_num) * label_num;
  }
  return ratios;
}

CorrectionResult apply_correction(const TriStateLabels& labels, const Matrix& scores,
                                  std::span<const std::size_t> counts) {
  if (scores.rows() != labels.n_samples() || scores.cols() != labels.n_labels()) {
    throw ContractError("apply_correction: scores and labels shapes differ");
  }
  if (counts.size() != labels.n_labels()) {
    throw ContractError("apply_correction: one count per label required");
  }
  CorrectionResult result{labels, {}};
  std::vector<std::size_t> pool;
  for (std::size_t l = 0; l < labels.n_labels(); ++l) {
    pool.clear();
    for (std::size_t i = 0; i < labels.n_samples(); ++i)
      if (labels(i, l) == LabelState::kUnknown) pool.push_back(i);
    if (counts[l] > pool.size()) {
      throw ContractError("apply_correction: class " + std::to_string(l) + " asks for " +
                          std::to_string(counts[l]) + " flips but only " +
                          std::to_string(pool.size()) + " entries are unobserved");
    }
    std::stable_sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
      return scores(a, l) > scores(b, l);
    });
    for (std::size_t k = 0; k < counts[l]; ++k) {
      result.labels(pool[k], l) = LabelState::kPositive;
      result.flips.push_back({pool[k], l, scores(pool[k], l)});
    }
  }
  return result;
}

}  // namespace opml
