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

#ifndef OPML_TRAINER_H_
#define OPML_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opml/correction.h"
#include "opml/labels.h"
#include "opml/losses.h"
#include "opml/metrics.h"
#include "opml/numkit.h"
#include "opml/regularizer.h"

namespace opml {

enum class LossKind { kBce, kFocal, kAsymmetric, kZlpr, kOpml, kSoftOpml };
enum class ModelKind { kLinear, kMlp };

// CLI spellings: bce, focal, asl, zlpr, opml, soft-opml.
std::string LossName(LossKind kind);
LossKind ParseLossKind(const std::string& name);
std::string ModelName(ModelKind kind);
ModelKind ParseModelKind(const std::string& name);

struct LossSpec {
  LossKind kind = LossKind::kOpml;
  double alpha_tilde = 0.6;
  double beta_tilde = 0.4;
  double focal_gamma = 2.0;
  double asl_gamma_pos = 0.0;
  double asl_gamma_neg = 4.0;
  double asl_margin = 0.05;
};

// Dispatches to the loss named by the LossSpec. Every loss except soft-opml sees the
// labels after assume_negative; soft-opml sees them as observed, with gamma
// (nullptr means all-zero weights).
LossResult compute_loss(const LossSpec& spec, const Matrix& scores,
                        const TriStateLabels& observed, const Matrix* gamma);

// Linear: scores = x W1 + b1.
// Mlp:    scores = relu(x W1 + b1) W2 + b2.
// Biases are 1 x width matrices; w2/b2 stay empty for Linear.
struct Model {
  ModelKind kind = ModelKind::kLinear;
  Matrix w1, b1, w2, b2;

  // Weights ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)] drawn row-major, W1 before
  // W2; biases start at zero.
  static Model Init(ModelKind kind, std::size_t n_features, std::size_t n_labels,
                    std::size_t hidden_width, Rng& rng);

  std::size_t n_features() const { return w1.rows(); }
  std::size_t n_labels() const { return kind == ModelKind::kLinear ? w1.cols() : w2.cols(); }
  std::size_t hidden_width() const { return kind == ModelKind::kMlp ? w1.cols() : 0; }

  Matrix Scores(const Matrix& x) const;

  // Parameter blocks in a fixed order with display names
  // (W, b for Linear; W1, b1, W2, b2 for Mlp).
  std::vector<std::string> BlockNames() const;
  std::vector<Matrix*> Blocks();
  std::vector<const Matrix*> Blocks() const;

  friend bool operator==(const Model&, const Model&) = default;
};

struct TrainConfig {
  LossSpec loss;
  ModelKind model = ModelKind::kLinear;
  std::size_t hidden_width = 64;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  HighRankConfig high_rank;
  // Smoothing weights are always refreshed for soft-opml; correction is
  // opt-in for any loss.
  bool correction = false;
  CorrectionConfig correction_cfg;
  bool eval_each_epoch = true;
  // First 1-based epoch included in the validation-mAP spread statistic.
  std::size_t stability_window_start = 10;
  double histogram_bin_width = 0.2;

  void Validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_map;
  std::optional<double> test_map;
};

struct FlipLogEntry {
  std::size_t epoch = 0;
  std::size_t sample = 0;
  std::size_t label = 0;
  double score = 0.0;
};

struct CorrectionSummary {
  std::size_t epoch = 0;
  std::vector<double> training_ap;
  std::vector<double> cor_ratio;
  std::vector<std::size_t> counts;
};

struct Evaluation {
  ApReport ap;
  std::vector<std::size_t> histogram;
};

struct RunReport {
  std::vector<EpochRecord> epochs;
  std::optional<Evaluation> final_eval;  // test split if given, else validation
  std::optional<std::size_t> best_epoch;  // by validation mAP
  std::optional<double> best_val_map;
  std::optional<double> test_map_at_best_val;
  // Population standard deviation of validation mAP over
  // [stability_window_start, epochs].
  std::optional<double> val_map_std;
  std::vector<FlipLogEntry> flips;
  std::optional<CorrectionSummary> correction;
};

struct TrainResult {
  Model model;
  RunReport report;
};

// Deterministic minibatch SGD. Only features and observed labels of `train`
// reach the objective; validation/test truth drive evaluation only.
TrainResult train(const Dataset& train_set, Model model, const TrainConfig& cfg,
                  Rng& rng, const Dataset* validation = nullptr,
                  const Dataset* test = nullptr);

// sigmoid(scores) scored against truth, plus the positive-confidence histogram.
Evaluation evaluate(const Model& model, const Dataset& data, double bin_width = 0.2);

// Objective value and parameter gradients for one batch: the loss on the
// batch scores plus the high-rank penalty on sigmoid(scores) when lambda > 0.
struct BatchGradient {
  double value = 0.0;
  std::vector<Matrix> grads;  // aligned with Model::Blocks()
};
BatchGradient objective_gradient(const Model& model, const Matrix& x,
                                 const TriStateLabels& observed, const Matrix* gamma,
                                 const LossSpec& loss, const HighRankConfig& high_rank);

struct GradCheckBlock {
  std::string name;
  double max_rel_error = 0.0;
  // Entries left out because they sit too close to a relu kink.
  std::size_t skipped = 0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double max_rel_error = 0.0;
  std::size_t skipped = 0;
};

// Backprop gradients against Richardson-extrapolated central differences
// (steps t and t/2) of the full objective. Error per entry is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-5). For the mlp, t is
// capped per entry at half the distance to the nearest relu kink; entries
// that would need t < h/10 are skipped and counted.
GradCheckReport grad_check(const Model& model, const Matrix& x,
                           const TriStateLabels& observed, const Matrix* gamma,
                           const LossSpec& loss, const HighRankConfig& high_rank,
                           double h = 1e-4);

}  // namespace opml

#endif  // OPML_TRAINER_H_
