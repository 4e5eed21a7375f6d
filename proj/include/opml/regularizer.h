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

#ifndef OPML_REGULARIZER_H_
#define OPML_REGULARIZER_H_

#include "opml/losses.h"
#include "opml/numkit.h"

namespace opml {

struct HighRankConfig {
  double lambda = 1e-3;
  // Diagonal shift keeping log det finite for rank-deficient batches.
  double epsilon = 1e-6;

  void Validate() const;
};

// -lambda * log det(Y^T Y + epsilon I) on a predicted label matrix Y (batch x
// labels, probabilities). The gradient is with respect to Y:
//   -2 lambda Y (Y^T Y + epsilon I)^{-1},
// obtained from the Cholesky factors. Chaining through the sigmoid is the
// caller's job.
LossResult high_rank_penalty(const Matrix& y_pred, const HighRankConfig& cfg);

}  // namespace opml

#endif  // OPML_REGULARIZER_H_
