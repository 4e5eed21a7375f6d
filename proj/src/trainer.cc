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

#include "opml/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

#include "opml/errors.h"

namespace opml {

std::string LossName(LossKind kind) {
  switch (kind) {
    case LossKind::kBce: return "bce";
    case LossKind::kFocal: return "focal";
    case LossKind::kAsymmetric: return "asl";
    case LossKind::kZlpr: return "zlpr";
    case LossKind::kOpml: return "opml";
    case LossKind::kSoftOpml: return "soft-opml";
  }
  return "unknown";
}

LossKind ParseLossKind(const std::string& name) {
  for (LossKind k : {LossKind::kBce, LossKind::kFocal, LossKind::kAsymmetric,
                     LossKind::kZlpr, LossKind::kOpml, LossKind::kSoftOpml}) {
    if (LossName(k) == name) return k;
  }
  throw ConfigError("unknown loss \"" + name +
                    "\" (expected bce, focal, asl, zlpr, opml, soft-opml)");
}

std::string ModelName(ModelKind kind) {
  return kind == ModelKind::kLinear ? "linear" : "mlp";
}

ModelKind ParseModelKind(const std::string& name) {
  if (name == "linear") return ModelKind::kLinear;
  if (name == "mlp") return ModelKind::kMlp;
  throw ConfigError("unknown model \"" + name + "\" (expected linear, mlp)");
}

LossResult compute_loss(const LossSpec& spec, const Matrix& scores,
                        const TriStateLabels& observed, const Matrix* gamma) {
  if (spec.kind == LossKind::kSoftOpml) {
    const OpmlParams params(spec.alpha_tilde, spec.beta_tilde);
    if (gamma != nullptr) return soft_opml(scores, observed, *gamma, params);
    return soft_opml(scores, observed, Matrix(scores.rows(), scores.cols()), params);
  }
  const TriStateLabels labels = assume_negative(observed);
  switch (spec.kind) {
    case LossKind::kBce:
      return bce(scores, labels);
    case LossKind::kFocal:
      return focal(scores, labels, spec.focal_gamma);
    case LossKind::kAsymmetric:
      return asymmetric(scores, labels, spec.asl_gamma_pos, spec.asl_gamma_neg,
                        spec.asl_margin);
    case LossKind::kZlpr:
      return zlpr(scores, labels);
    case LossKind::kOpml:
      // Identical to opml_sp on single-positive rows; also covers rows that
      // gained positives through correction.
      return opml_full(scores, labels, OpmlParams(spec.alpha_tilde, spec.beta_tilde));
    case LossKind::kSoftOpml:
      break;
  }
  throw ContractError("compute_loss: unhandled loss kind");
}

Model Model::Init(ModelKind kind, std::size_t n_features, std::size_t n_labels,
                  std::size_t hidden_width, Rng& rng) {
  if (n_features == 0 || n_labels == 0) {
    throw DomainError("Model::Init: dimensions must be positive");
  }
  auto uniform_layer = [&rng](std::size_t fan_in, std::size_t fan_out) {
    Matrix w(fan_in, fan_out);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : w.data()) v = rng.Uniform(-bound, bound);
    return w;
  };
  Model m;
  m.kind = kind;
  if (kind == ModelKind::kLinear) {
    m.w1 = uniform_layer(n_features, n_labels);
    m.b1 = Matrix(1, n_labels);
  } else {
    if (hidden_width == 0) throw DomainError("Model::Init: hidden_width must be >= 1");
    m.w1 = uniform_layer(n_features, hidden_width);
    m.b1 = Matrix(1, hidden_width);
    m.w2 = uniform_layer(hidden_width, n_labels);
    m.b2 = Matrix(1, n_labels);
  }
  return m;
}

namespace {

void AddBias(Matrix& z, const Matrix& bias) {
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    for (std::size_t j = 0; j < z.cols(); ++j) r[j] += bias(0, j);
  }
}

Matrix ColumnSums(const Matrix& g) {
  Matrix out(1, g.cols());
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) out(0, j) += g(i, j);
  return out;
}

Matrix Sigmoid(const Matrix& s) {
  Matrix p(s.rows(), s.cols());
  for (std::size_t k = 0; k < s.size(); ++k) p.data()[k] = sigmoid(s.data()[k]);
  return p;
}

}  // namespace

Matrix Model::Scores(const Matrix& x) const {
  if (x.cols() != n_features()) {
    throw ContractError("Model::Scores: expected " + std::to_string(n_features()) +
                        " features, got " + std::to_string(x.cols()));
  }
  Matrix z = MatMul(x, w1);
  AddBias(z, b1);
  if (kind == ModelKind::kLinear) return z;
  for (double& v : z.data()) v = std::max(v, 0.0);
  Matrix s = MatMul(z, w2);
  AddBias(s, b2);
  return s;
}

std::vector<std::string> Model::BlockNames() const {
  if (kind == ModelKind::kLinear) return {"W", "b"};
  return {"W1", "b1", "W2", "b2"};
}

std::vector<Matrix*> Model::Blocks() {
  if (kind == ModelKind::kLinear) return {&w1, &b1};
  return {&w1, &b1, &w2, &b2};
}

std::vector<const Matrix*> Model::Blocks() const {
  if (kind == ModelKind::kLinear) return {&w1, &b1};
  return {&w1, &b1, &w2, &b2};
}

void TrainConfig::Validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and >= 0");
  }
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (model == ModelKind::kMlp && hidden_width == 0) {
    throw ConfigError("hidden_width must be >= 1 for the mlp model");
  }
  try {
    high_rank.Validate();
    OpmlParams(loss.alpha_tilde, loss.beta_tilde);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (loss.focal_gamma < 0.0 || loss.asl_gamma_pos < 0.0 || loss.asl_gamma_neg < 0.0) {
    throw ConfigError("focusing exponents must be >= 0");
  }
  if (!(loss.asl_margin >= 0.0 && loss.asl_margin < 1.0)) {
    throw ConfigError("asl_margin must lie in [0, 1)");
  }
  correction_cfg.Validate(epochs);
}

BatchGradient objective_gradient(const Model& model, const Matrix& x,
                                 const TriStateLabels& observed, const Matrix* gamma,
                                 const LossSpec& loss, const HighRankConfig& high_rank) {
  Matrix pre = MatMul(x, model.w1);
  AddBias(pre, model.b1);
  Matrix hidden;
  Matrix scores;
  if (model.kind == ModelKind::kLinear) {
    scores = pre;
  } else {
    hidden = pre;
    for (double& v : hidden.data()) v = std::max(v, 0.0);
    scores = MatMul(hidden, model.w2);
    AddBias(scores, model.b2);
  }

  LossResult res = compute_loss(loss, scores, observed, gamma);
  BatchGradient out;
  out.value = res.value;
  Matrix& g = res.grad;
  if (high_rank.lambda > 0.0) {
    const Matrix probs = Sigmoid(scores);
    const LossResult reg = high_rank_penalty(probs, high_rank);
    out.value += reg.value;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double p = probs.data()[k];
      g.data()[k] += reg.grad.data()[k] * p * (1.0 - p);
    }
  }

  if (model.kind == ModelKind::kLinear) {
    out.grads.push_back(MatTMul(x, g));
    out.grads.push_back(ColumnSums(g));
    return out;
  }
  Matrix d_hidden = MatMul(g, model.w2.Transpose());
  for (std::size_t k = 0; k < d_hidden.size(); ++k) {
    if (pre.data()[k] <= 0.0) d_hidden.data()[k] = 0.0;
  }
  out.grads.push_back(MatTMul(x, d_hidden));
  out.grads.push_back(ColumnSums(d_hidden));
  out.grads.push_back(MatTMul(hidden, g));
  out.grads.push_back(ColumnSums(g));
  return out;
}

namespace {

Matrix GatherRows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto src = m.row(rows[k]);
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return out;
}

std::vector<double> TrainingAp(const Matrix& scores, const TriStateLabels& observed) {
  // Classes without an observed positive get AP 0.
  const ApReport rep = observed_average_precision(scores, assume_negative(observed));
  return rep.per_class_ap;
}

double PopulationStd(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

Evaluation evaluate(const Model& model, const Dataset& data, double bin_width) {
  const Matrix probs = Sigmoid(model.Scores(data.features));
  Evaluation ev;
  ev.ap = mean_average_precision(probs, data.truth);
  ev.histogram = positive_confidence_histogram(probs, data.truth, bin_width);
  return ev;
}

TrainResult train(const Dataset& train_set, Model model, const TrainConfig& cfg,
                  Rng& rng, const Dataset* validation, const Dataset* test) {
  cfg.Validate();
  const Matrix& features = train_set.features;
  TriStateLabels observed = train_set.observed;
  const std::size_t n = features.rows();
  const std::size_t n_labels = observed.n_labels();
  if (n == 0) throw DataError("train: empty training set");
  if (observed.n_samples() != n) throw DataError("train: label and feature rows differ");
  if (model.n_features() != features.cols() || model.n_labels() != n_labels) {
    throw DataError("train: model expects " + std::to_string(model.n_features()) + "x" +
                    std::to_string(model.n_labels()) + " but data is " +
                    std::to_string(features.cols()) + "x" + std::to_string(n_labels));
  }
  for (const Dataset* d : {validation, test}) {
    if (d != nullptr && (d->n_features() != features.cols() || d->n_labels() != n_labels)) {
      throw DataError("train: evaluation split dimensions differ from training data");
    }
  }

  const bool smoothing = cfg.loss.kind == LossKind::kSoftOpml;
  const std::size_t correction_epoch =
      cfg.correction ? cfg.correction_cfg.ResolvedCorrectionEpoch(cfg.epochs) : 0;
  std::optional<Matrix> gamma;

  TrainResult result;
  RunReport& report = result.report;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const bool do_correction = cfg.correction && epoch == correction_epoch;
    const bool do_smoothing = smoothing && epoch > cfg.correction_cfg.warmup_epochs;
    if (do_correction || do_smoothing) {
      const Matrix scores = model.Scores(features);
      std::vector<double> ap = TrainingAp(scores, observed);
      if (do_correction) {
        std::vector<std::size_t> obs_num(n_labels), unknown(n_labels);
        for (std::size_t l = 0; l < n_labels; ++l) {
          obs_num[l] = observed.CountInColumn(l, LabelState::kPositive);
          unknown[l] = observed.CountInColumn(l, LabelState::kUnknown);
        }
        CorrectionSummary summary;
        summary.epoch = epoch;
        summary.training_ap = ap;
        summary.cor_ratio = correction_ratios(n, obs_num, cfg.correction_cfg.label_num);
        summary.counts =
            correction_counts(n, obs_num, ap, cfg.correction_cfg.label_num, unknown);
        CorrectionResult corrected = apply_correction(observed, scores, summary.counts);
        observed = std::move(corrected.labels);
        for (const FlipRecord& f : corrected.flips) {
          report.flips.push_back({epoch, f.sample, f.label, f.score});
        }
        spdlog::info("epoch {}: corrected {} labels", epoch, corrected.flips.size());
        report.correction = std::move(summary);
        if (do_smoothing) ap = TrainingAp(scores, observed);
      }
      if (do_smoothing) {
        gamma = smoothing_weights(Sigmoid(scores), ap, cfg.correction_cfg.epsilon_power);
      }
    }

    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng_uniform_index(rng, i)]);

    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      const std::span<const std::size_t> rows(perm.data() + start, stop - start);
      const Matrix x = GatherRows(features, rows);
      const TriStateLabels y = observed.SelectRows(rows);
      std::optional<Matrix> gamma_batch;
      if (gamma) gamma_batch = GatherRows(*gamma, rows);
      BatchGradient bg = objective_gradient(model, x, y, gamma_batch ? &*gamma_batch : nullptr,
                                            cfg.loss, cfg.high_rank);
      if (!std::isfinite(bg.value)) {
        throw NumericalError("non-finite objective at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(n_batches));
      }
      auto blocks = model.Blocks();
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        auto& params = blocks[b]->data();
        const auto& grad = bg.grads[b].data();
        for (std::size_t k = 0; k < params.size(); ++k) params[k] -= cfg.learning_rate * grad[k];
      }
      loss_sum += bg.value;
      ++n_batches;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n_batches);
    if (cfg.eval_each_epoch || epoch == cfg.epochs) {
      if (validation) rec.val_map = evaluate(model, *validation, cfg.histogram_bin_width).ap.map;
      if (test) rec.test_map = evaluate(model, *test, cfg.histogram_bin_width).ap.map;
    }
    spdlog::debug("epoch {} loss {:.6f} val_map {:.4f} test_map {:.4f}", epoch, rec.train_loss,
                  rec.val_map.value_or(-1.0), rec.test_map.value_or(-1.0));
    report.epochs.push_back(rec);
  }

  std::vector<double> window;
  for (const EpochRecord& rec : report.epochs) {
    if (!rec.val_map) continue;
    if (!report.best_val_map || *rec.val_map > *report.best_val_map) {
      report.best_val_map = rec.val_map;
      report.best_epoch = rec.epoch;
      report.test_map_at_best_val = rec.test_map;
    }
    if (rec.epoch >= cfg.stability_window_start) window.push_back(*rec.val_map);
  }
  if (!window.empty()) report.val_map_std = PopulationStd(window);

  if (const Dataset* final_split = test ? test : validation) {
    report.final_eval = evaluate(model, *final_split, cfg.histogram_bin_width);
  }
  result.model = std::move(model);
  return result;
}

namespace {

// Per-entry distance (in parameter units) to the nearest relu kink. Only W1
// and b1 move hidden pre-activations; W1(i, j) shifts column j by x(:, i).
std::vector<Matrix> KinkDistances(const Model& model, const Matrix& x) {
  std::vector<Matrix> dist;
  for (const Matrix* block : model.Blocks()) {
    Matrix d(block->rows(), block->cols());
    for (double& v : d.data()) v = INFINITY;
    dist.push_back(std::move(d));
  }
  if (model.kind != ModelKind::kMlp) return dist;
  Matrix pre = MatMul(x, model.w1);
  AddBias(pre, model.b1);
  for (std::size_t j = 0; j < pre.cols(); ++j) {
    for (std::size_t n = 0; n < pre.rows(); ++n) {
      const double gap = std::abs(pre(n, j));
      dist[1](0, j) = std::min(dist[1](0, j), gap);
      for (std::size_t i = 0; i < x.cols(); ++i) {
        if (x(n, i) != 0.0) dist[0](i, j) = std::min(dist[0](i, j), gap / std::abs(x(n, i)));
      }
    }
  }
  return dist;
}

}  // namespace

GradCheckReport grad_check(const Model& model, const Matrix& x,
                           const TriStateLabels& observed, const Matrix* gamma,
                           const LossSpec& loss, const HighRankConfig& high_rank, double h) {
  const BatchGradient analytic =
      objective_gradient(model, x, observed, gamma, loss, high_rank);
  const std::vector<Matrix> kink = KinkDistances(model, x);
  GradCheckReport report;
  const auto names = model.BlockNames();
  const auto blocks = model.Blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    GradCheckBlock block{names[b], 0.0, 0};
    for (std::size_t k = 0; k < blocks[b]->size(); ++k) {
      const double step = std::min(h, 0.5 * kink[b].data()[k]);
      if (step < 0.1 * h) {
        ++block.skipped;
        continue;
      }
      auto objective = [&](const Matrix& probe) {
        Model perturbed = model;
        perturbed.Blocks()[b]->data()[k] = probe(0, 0);
        return objective_gradient(perturbed, x, observed, gamma, loss, high_rank).value;
      };
      const Matrix at(1, 1, {blocks[b]->data()[k]});
      // Richardson extrapolation of two central differences cancels the h^2
      // truncation term, which dominates when Y^T Y is ill-conditioned.
      const double coarse = finite_diff_grad(objective, at, step)(0, 0);
      const double fine = finite_diff_grad(objective, at, 0.5 * step)(0, 0);
      const double fd = (4.0 * fine - coarse) / 3.0;
      const double a = analytic.grads[b].data()[k];
      const double denom = std::max({std::abs(a), std::abs(fd), 1e-5});
      block.max_rel_error = std::max(block.max_rel_error, std::abs(a - fd) / denom);
    }
    report.max_rel_error = std::max(report.max_rel_error, block.max_rel_error);
    report.skipped += block.skipped;
    report.blocks.push_back(std::move(block));
  }
  return report;
}

}  // namespace opml
