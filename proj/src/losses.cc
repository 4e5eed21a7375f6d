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

#include "opml/losses.h"

#include <cmath>
#include <string>
#include <vector>

#include "opml/errors.h"

namespace opml {

OpmlParams::OpmlParams(double alpha_tilde, double beta_tilde)
    : alpha_tilde_(alpha_tilde), beta_tilde_(beta_tilde) {
  if (!(alpha_tilde > 0.0 && alpha_tilde < 1.0) ||
      !(beta_tilde > 0.0 && beta_tilde < 1.0)) {
    throw DomainError("OpmlParams: alpha_tilde and beta_tilde must lie in (0, 1)");
  }
  alpha_ = alpha_tilde / (1.0 - alpha_tilde);
  beta_ = beta_tilde / (1.0 - beta_tilde);
}

namespace {

void CheckShapes(const Matrix& scores, const TriStateLabels& labels, const char* who) {
  if (scores.rows() != labels.n_samples() || scores.cols() != labels.n_labels()) {
    throw ContractError(std::string(who) + ": scores and labels shapes differ");
  }
  if (scores.rows() == 0) throw ContractError(std::string(who) + ": empty batch");
}

void RequireObserved(const TriStateLabels& labels, const char* who) {
  for (std::size_t i = 0; i < labels.n_samples(); ++i) {
    if (labels.CountInRow(i, LabelState::kUnknown) != 0) {
      throw ContractError(std::string(who) + ": row " + std::to_string(i) +
                          " has Unknown labels; apply assume_negative first");
    }
  }
}

// Focal term in the margin-free form. z is the score signed toward the
// observed class (s for positives, -s for negatives), q = sigmoid(-z) is the
// probability of the wrong class. Returns q^gamma * softplus(-z) and writes
// its derivative with respect to z.
double FocalTerm(double z, double gamma, double* dz) {
  const double q = sigmoid(-z);
  const double sp = softplus(-z);
  const double w = std::pow(q, gamma);
  *dz = -w * (gamma * (1.0 - q) * sp + q);
  return w * sp;
}

// Shared kernel for the sigmoid family. gamma_pos/gamma_neg of zero and a zero
// margin reproduce binary cross entropy exactly.
LossResult SigmoidFamily(const Matrix& scores, const TriStateLabels& labels,
                         double gamma_pos, double gamma_neg, double margin,
                         const char* who) {
  CheckShapes(scores, labels, who);
  RequireObserved(labels, who);
  const double scale = 1.0 / static_cast<double>(scores.rows() * scores.cols());
  LossResult out{0.0, Matrix(scores.rows(), scores.cols())};
  double total = 0.0;
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    for (std::size_t l = 0; l < scores.cols(); ++l) {
      const double s = scores(i, l);
      double dz = 0.0;
      if (labels(i, l) == LabelState::kPositive) {
        total += FocalTerm(s, gamma_pos, &dz);
        out.grad(i, l) = dz * scale;
      } else if (margin == 0.0) {
        total += FocalTerm(-s, gamma_neg, &dz);
        out.grad(i, l) = -dz * scale;
      } else {
        const double p = sigmoid(s);
        const double shifted = p - margin;
        if (shifted <= 0.0) continue;
        const double one_minus = sigmoid(-s) + margin;
        const double neg_log = -std::log(one_minus);
        const double w = std::pow(shifted, gamma_neg);
        total += w * neg_log;
        const double d_shifted =
            (gamma_neg > 0.0 ? gamma_neg * std::pow(shifted, gamma_neg - 1.0) * neg_log
                             : 0.0) +
            w / one_minus;
        out.grad(i, l) = d_shifted * p * (1.0 - p) * scale;
      }
    }
  }
  out.value = total * scale;
  return out;
}

// Per-row two-sided log-sum used by both OPML variants.
LossResult OpmlKernel(const Matrix& scores, const TriStateLabels& labels,
                      const OpmlParams& params) {
  const double inv_n = 1.0 / static_cast<double>(scores.rows());
  LossResult out{0.0, Matrix(scores.rows(), scores.cols())};
  std::vector<double> pos_terms, neg_terms;
  double total = 0.0;
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    pos_terms.clear();
    neg_terms.clear();
    for (std::size_t l = 0; l < scores.cols(); ++l) {
      if (labels(i, l) == LabelState::kPositive) pos_terms.push_back(-scores(i, l));
      if (labels(i, l) == LabelState::kNegative) neg_terms.push_back(scores(i, l));
    }
    const double pos_lse = stable_log_sum(params.alpha(), pos_terms);
    const double neg_lse = stable_log_sum(params.beta(), neg_terms);
    total += pos_lse + neg_lse;
    for (std::size_t l = 0; l < scores.cols(); ++l) {
      if (labels(i, l) == LabelState::kPositive) {
        out.grad(i, l) = -std::exp(-scores(i, l) - pos_lse) * inv_n;
      } else if (labels(i, l) == LabelState::kNegative) {
        out.grad(i, l) = std::exp(scores(i, l) - neg_lse) * inv_n;
      }
    }
  }
  out.value = total * inv_n;
  return out;
}

}  // namespace

LossResult bce(const Matrix& scores, const TriStateLabels& labels) {
  CheckShapes(scores, labels, "bce");
  RequireObserved(labels, "bce");
  const double scale = 1.0 / static_cast<double>(scores.rows() * scores.cols());
  LossResult out{0.0, Matrix(scores.rows(), scores.cols())};
  double total = 0.0;
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    for (std::size_t l = 0; l < scores.cols(); ++l) {
      const double s = scores(i, l);
      if (labels(i, l) == LabelState::kPositive) {
        total += softplus(-s);
        out.grad(i, l) = -sigmoid(-s) * scale;
      } else {
        total += softplus(s);
        out.grad(i, l) = sigmoid(s) * scale;
      }
    }
  }
  out.value = total * scale;
  return out;
}

LossResult focal(const Matrix& scores, const TriStateLabels& labels,
                 double gamma_focus) {
  if (!(gamma_focus >= 0.0)) throw DomainError("focal: gamma must be >= 0");
  return SigmoidFamily(scores, labels, gamma_focus, gamma_focus, 0.0, "focal");
}

LossResult asymmetric(const Matrix& scores, const TriStateLabels& labels,
                      double gamma_pos, double gamma_neg, double margin) {
  if (!(gamma_pos >= 0.0) || !(gamma_neg >= 0.0)) {
    throw DomainError("asymmetric: focusing exponents must be >= 0");
  }
  if (!(margin >= 0.0 && margin < 1.0)) {
    throw DomainError("asymmetric: margin must lie in [0, 1)");
  }
  return SigmoidFamily(scores, labels, gamma_pos, gamma_neg, margin, "asymmetric");
}

LossResult opml_sp(const Matrix& scores, const TriStateLabels& labels,
                   const OpmlParams& params) {
  CheckShapes(scores, labels, "opml_sp");
  for (std::size_t i = 0; i < labels.n_samples(); ++i) {
    const std::size_t n_pos = labels.CountInRow(i, LabelState::kPositive);
    if (n_pos != 1) {
      throw ContractError("opml_sp: row " + std::to_string(i) + " has " +
                          std::to_string(n_pos) + " positives, expected exactly 1");
    }
  }
  return OpmlKernel(scores, labels, params);
}

LossResult opml_full(const Matrix& scores, const TriStateLabels& labels,
                     const OpmlParams& params) {
  CheckShapes(scores, labels, "opml_full");
  RequireObserved(labels, "opml_full");
  return OpmlKernel(scores, labels, params);
}

LossResult zlpr(const Matrix& scores, const TriStateLabels& labels) {
  return opml_full(scores, labels, OpmlParams(0.5, 0.5));
}

LossResult soft_opml(const Matrix& scores, const TriStateLabels& labels,
                     const Matrix& gamma, const OpmlParams& params) {
  CheckShapes(scores, labels, "soft_opml");
  if (gamma.rows() != scores.rows() || gamma.cols() != scores.cols()) {
    throw ContractError("soft_opml: gamma shape differs from scores");
  }
  const double inv_n = 1.0 / static_cast<double>(scores.rows());
  LossResult out{0.0, Matrix(scores.rows(), scores.cols())};
  std::vector<double> pos_terms, unk_terms, unk_weights, neg_terms, neg_weights;
  double total = 0.0;
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    pos_terms.clear();
    unk_terms.clear();
    unk_weights.clear();
    neg_terms.clear();
    neg_weights.clear();
    for (std::size_t l = 0; l < scores.cols(); ++l) {
      const double s = scores(i, l);
      switch (labels(i, l)) {
        case LabelState::kPositive:
          pos_terms.push_back(-s);
          break;
        case LabelState::kNegative:
          neg_terms.push_back(s);
          neg_weights.push_back(1.0);
          break;
        case LabelState::kUnknown: {
          const double g = gamma(i, l);
          if (!(g >= 0.0 && g <= 1.0)) {
            throw ContractError("soft_opml: gamma(" + std::to_string(i) + "," +
                                std::to_string(l) + ") outside [0, 1]");
          }
          unk_terms.push_back(-s);
          unk_weights.push_back(g);
          neg_terms.push_back(s);
          neg_weights.push_back(1.0 - g);
          break;
        }
      }
    }
    if (pos_terms.empty()) {
      throw ContractError("soft_opml: row " + std::to_string(i) + " has no positive");
    }
    const double pos_lse = stable_log_sum(params.alpha(), pos_terms);
    const double unk_lse =
        stable_weighted_log_sum(params.alpha(), unk_terms, unk_weights);
    const double neg_lse = stable_weighted_log_sum(params.beta(), neg_terms, neg_weights);
    total += pos_lse + unk_lse + neg_lse;
    for (std::size_t l = 0; l < scores.cols(); ++l) {
      const double s = scores(i, l);
      switch (labels(i, l)) {
        case LabelState::kPositive:
          out.grad(i, l) = -std::exp(-s - pos_lse) * inv_n;
          break;
        case LabelState::kNegative:
          out.grad(i, l) = std::exp(s - neg_lse) * inv_n;
          break;
        case LabelState::kUnknown: {
          const double g = gamma(i, l);
          const double pull = g > 0.0 ? g * std::exp(-s - unk_lse) : 0.0;
          const double push = g < 1.0 ? (1.0 - g) * std::exp(s - neg_lse) : 0.0;
          out.grad(i, l) = (-pull + push) * inv_n;
          break;
        }
      }
    }
  }
  out.value = total * inv_n;
  return out;
}

}  // namespace opml
