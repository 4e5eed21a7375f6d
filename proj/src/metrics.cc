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

#include "opml/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "opml/errors.h"

namespace opml {

double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> truth) {
  if (scores.size() != truth.size()) {
    throw ContractError("average_precision: scores and truth sizes differ");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (!truth[order[rank]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
  }
  if (hits == 0) throw DomainError("average_precision: no positive samples");
  return sum / static_cast<double>(hits);
}

namespace {

ApReport Summarize(std::vector<double> per_class, std::vector<std::size_t> positives) {
  ApReport report;
  report.per_class_ap = std::move(per_class);
  report.positives_per_class = std::move(positives);
  double sum = 0.0;
  for (std::size_t l = 0; l < report.per_class_ap.size(); ++l) {
    if (report.positives_per_class[l] == 0) continue;
    report.evaluated_classes.push_back(l);
    sum += report.per_class_ap[l];
  }
  if (report.evaluated_classes.empty()) {
    throw DomainError("mean_average_precision: no class has a positive sample");
  }
  report.map = sum / static_cast<double>(report.evaluated_classes.size());
  return report;
}

}  // namespace

ApReport mean_average_precision(const Matrix& scores, const BinaryMatrix& truth) {
  if (scores.rows() != truth.rows() || scores.cols() != truth.cols()) {
    throw ContractError("mean_average_precision: shapes differ");
  }
  std::vector<double> per_class(scores.cols(), 0.0);
  std::vector<std::size_t> positives(scores.cols(), 0);
  std::vector<double> column(scores.rows());
  for (std::size_t l = 0; l < scores.cols(); ++l) {
    positives[l] = truth.ColumnCount(l);
    if (positives[l] == 0) continue;
    for (std::size_t i = 0; i < scores.rows(); ++i) column[i] = scores(i, l);
    per_class[l] = average_precision(column, truth.Column(l));
  }
  return Summarize(std::move(per_class), std::move(positives));
}

ApReport observed_average_precision(const Matrix& scores,
                                    const TriStateLabels& observed) {
  if (scores.rows() != observed.n_samples() || scores.cols() != observed.n_labels()) {
    throw ContractError("observed_average_precision: shapes differ");
  }
  std::vector<double> per_class(scores.cols(), 0.0);
  std::vector<std::size_t> positives(scores.cols(), 0);
  std::vector<double> column;
  std::vector<std::uint8_t> hits;
  for (std::size_t l = 0; l < scores.cols(); ++l) {
    column.clear();
    hits.clear();
    for (std::size_t i = 0; i < scores.rows(); ++i) {
      const LabelState s = observed(i, l);
      if (s == LabelState::kUnknown) continue;
      column.push_back(scores(i, l));
      hits.push_back(s == LabelState::kPositive ? 1 : 0);
    }
    positives[l] = static_cast<std::size_t>(std::count(hits.begin(), hits.end(), 1));
    if (positives[l] == 0) continue;
    per_class[l] = average_precision(column, hits);
  }
  return Summarize(std::move(per_class), std::move(positives));
}

std::vector<std::size_t> positive_confidence_histogram(const Matrix& pred,
                                                       const BinaryMatrix& truth,
                                                       double bin_width) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw ContractError("positive_confidence_histogram: shapes differ");
  }
  if (!(bin_width > 0.0 && bin_width <= 1.0)) {
    throw DomainError("positive_confidence_histogram: bin_width must lie in (0, 1]");
  }
  const double ratio = 1.0 / bin_width;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9) {
    throw DomainError("positive_confidence_histogram: bin_width must divide 1");
  }
  const auto n_bins = static_cast<std::size_t>(rounded);
  std::vector<std::size_t> counts(n_bins, 0);
  for (std::size_t i = 0; i < pred.rows(); ++i) {
    for (std::size_t l = 0; l < pred.cols(); ++l) {
      if (!truth(i, l)) continue;
      const double p = std::clamp(pred(i, l), 0.0, 1.0);
      // Integer bin count avoids p / w landing just under a bin edge.
      const auto bin = static_cast<std::size_t>(std::floor(p * static_cast<double>(n_bins)));
      ++counts[std::min(bin, n_bins - 1)];
    }
  }
  return counts;
}

}  // namespace opml
