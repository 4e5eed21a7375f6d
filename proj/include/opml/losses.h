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

#ifndef OPML_LOSSES_H_
#define OPML_LOSSES_H_

#include "opml/labels.h"
#include "opml/numkit.h"

namespace opml {

// Loss value and its gradient with respect to the raw scores.
struct LossResult {
  double value = 0.0;
  Matrix grad;
};

// OPML constants in the (0, 1) parameterization; alpha = a / (1 - a).
class OpmlParams {
 public:
  OpmlParams(double alpha_tilde, double beta_tilde);

  double alpha_tilde() const { return alpha_tilde_; }
  double beta_tilde() const { return beta_tilde_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

 private:
  double alpha_tilde_;
  double beta_tilde_;
  double alpha_;
  double beta_;
};

// Binary cross entropy on sigmoid(scores), averaged over all N*L entries.
// Labels must be fully observed (apply assume_negative first).
LossResult bce(const Matrix& scores, const TriStateLabels& labels);

// -(1 - p_t)^gamma log p_t, same normalization as bce; gamma = 0 is bce.
LossResult focal(const Matrix& scores, const TriStateLabels& labels,
                 double gamma_focus);

// Asymmetric loss: focal with separate exponents for positives and negatives,
// and negatives' probability shifted to max(p - margin, 0).
LossResult asymmetric(const Matrix& scores, const TriStateLabels& labels,
                      double gamma_pos, double gamma_neg, double margin);

// Single-positive OPML. Per row:
//   log(alpha + e^{-s_p}) + log(beta + sum_{n in Negative} e^{s_n}),
// averaged over rows. Unknown entries are ignored (zero gradient).
LossResult opml_sp(const Matrix& scores, const TriStateLabels& labels,
                   const OpmlParams& params);

// Full-label OPML. Per row:
//   log(alpha + sum_{p} e^{-s_p}) + log(beta + sum_{n} e^{s_n}).
// An empty positive or negative set leaves the constant log(alpha) or
// log(beta) with zero gradient. Rows with one Positive match opml_sp exactly.
LossResult opml_full(const Matrix& scores, const TriStateLabels& labels,
                     const OpmlParams& params);

// opml_full with alpha = beta = 1.
LossResult zlpr(const Matrix& scores, const TriStateLabels& labels);

// Soft OPML with smoothing weights gamma (same shape as scores; read only at
// Unknown entries). Per row:
//   log(alpha + sum_{P} e^{-s_p})
//   + log(alpha + sum_{U} gamma_l e^{-s_l})
//   + log(beta + sum_{U} (1 - gamma_l) e^{s_l} + sum_{N} e^{s_n}).
// With a single Positive and no Negative this is the plain soft form;
// corrected rows (several Positives) extend the first term like opml_full.
LossResult soft_opml(const Matrix& scores, const TriStateLabels& labels,
                     const Matrix& gamma, const OpmlParams& params);

}  // namespace opml

#endif  // OPML_LOSSES_H_
