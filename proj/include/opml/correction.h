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

#ifndef OPML_CORRECTION_H_
#define OPML_CORRECTION_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "opml/labels.h"
#include "opml/numkit.h"

namespace opml {

struct CorrectionConfig {
  // Label_num: scales how many unobserved labels a class may flip.
  double label_num = 0.8;
  // Exponent applied to class AP in the smoothing weights.
  double epsilon_power = 0.7;
  // Epochs trained before smoothing weights turn on.
  std::size_t warmup_epochs = 2;
  // 1-based epoch at whose start the one-shot correction fires. Unset means
  // ceil(0.4 * epochs), but never before warmup_epochs.
  std::optional<std::size_t> correction_epoch;

  void Validate(std::size_t total_epochs) const;
  std::size_t ResolvedCorrectionEpoch(std::size_t total_epochs) const;
};

// gamma_il = pred_il * ap_l^epsilon_power for every entry (callers read only
// the Unknown ones). Result lies in [0, 1].
Matrix smoothing_weights(const Matrix& pred, std::span<const double> ap,
                         double epsilon_power);

// floor(obs_num_l * label_num * (1 - ap_l)), clamped to unknown_count_l.
// tr_num only anchors the ratio obs_num_l / tr_num, which cancels.
std::vector<std::size_t> correction_counts(std::size_t tr_num,
                                           std::span<const std::size_t> obs_num,
                                           std::span<const double> ap,
                                           double label_num,
                                           std::span<const std::size_t> unknown_count);

// obs_num_l / tr_num * label_num, reported for audit.
std::vector<double> correction_ratios(std::size_t tr_num,
                                      std::span<const std::size_t> obs_num,
                                      double label_num);

struct FlipRecord {
  std::size_t sample = 0;
  std::size_t label = 0;
  double score = 0.0;
};

struct CorrectionResult {
  TriStateLabels labels;
  std::vector<FlipRecord> flips;
};

// For each class, the counts_l highest-scored Unknown entries (ties by
// ascending sample index) become Positive. Nothing else changes.
CorrectionResult apply_correction(const TriStateLabels& labels, const Matrix& scores,
                                  std::span<const std::size_t> counts);

}  // namespace opml

#endif  // OPML_CORRECTION_H_
