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

#include "opml/regularizer.h"

#include <cmath>

#include "opml/errors.h"

namespace opml {

void HighRankConfig::Validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("high-rank lambda must be finite and >= 0");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("high-rank epsilon must be finite and >= 0");
  }
}

LossResult high_rank_penalty(const Matrix& y_pred, const HighRankConfig& cfg) {
  cfg.Validate();
  if (!y_pred.AllFinite()) {
    throw ContractError("high_rank_penalty: non-finite prediction entries");
  }
  Matrix shifted = MatTMul(y_pred, y_pred);
  for (std::size_t i = 0; i < shifted.rows(); ++i) shifted(i, i) += cfg.epsilon;
  const Cholesky chol(shifted);

  LossResult out;
  out.value = -cfg.lambda * chol.LogDet();
  // (Y^T Y + eps I)^{-1} Y^T, transposed back to Y's shape.
  const Matrix solved = chol.Solve(y_pred.Transpose());
  out.grad = Matrix(y_pred.rows(), y_pred.cols());
  const double scale = -2.0 * cfg.lambda;
  for (std::size_t i = 0; i < y_pred.rows(); ++i)
    for (std::size_t l = 0; l < y_pred.cols(); ++l)
      out.grad(i, l) = scale * solved(l, i);
  return out;
}

}  // namespace opml
