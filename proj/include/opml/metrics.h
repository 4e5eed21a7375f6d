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

#ifndef OPML_METRICS_H_
#define OPML_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "opml/labels.h"
#include "opml/numkit.h"

namespace opml {

struct ApReport {
  // One entry per label; classes without positives hold 0 and are left out of
  // evaluated_classes and of the mean.
  std::vector<double> per_class_ap;
  double map = 0.0;
  std::vector<std::size_t> evaluated_classes;
  std::vector<std::size_t> positives_per_class;
};

// Precision at each positive, averaged. Samples are ranked by descending
// score, ties broken by ascending sample index. Throws DomainError when truth
// has no positive.
double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> truth);

// Per-class AP over the columns of scores; mAP over classes with positives.
ApReport mean_average_precision(const Matrix& scores, const BinaryMatrix& truth);

// AP against observed labels only: Positive entries are positives, Negative
// entries negatives, Unknown entries are skipped. Classes without an observed
// positive are excluded as above.
ApReport observed_average_precision(const Matrix& scores,
                                    const TriStateLabels& observed);

// Counts of pred at truth-positive entries per bin [i w, (i+1) w); the last
// bin is closed at 1. bin_width must divide 1 evenly.
std::vector<std::size_t> positive_confidence_histogram(const Matrix& pred,
                                                       const BinaryMatrix& truth,
                                                       double bin_width);

}  // namespace opml

#endif  // OPML_METRICS_H_
