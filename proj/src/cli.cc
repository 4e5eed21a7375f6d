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

#include "opml/cli.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "opml/errors.h"
#include "opml/labels.h"
#include "opml/serialize.h"
#include "opml/trainer.h"

namespace opml {

namespace fs = std::filesystem;
using json = nlohmann::json;

void ConfigureLoggingFromEnv() {
  auto logger = spdlog::get("opml");
  if (!logger) logger = spdlog::stderr_color_mt("opml");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("OPML_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::err);
  }
}

namespace {

// Stream separation keeps data-derived draws independent of the training
// stream that shares the same user seed.
constexpr std::uint64_t kDataStreamSalt = 0xD1B54A32D192ED03ULL;

struct Overrides {
  std::optional<std::string> loss, model;
  std::optional<double> alpha_tilde, beta_tilde, lambda, label_num, epsilon_power,
      learning_rate;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, batch_size;
  bool single_positive = false;
  bool correction = false;

  void Register(CLI::App* cmd) {
    cmd->add_option("--loss", loss, "bce | focal | asl | zlpr | opml | soft-opml");
    cmd->add_option("--model", model, "linear | mlp");
    cmd->add_option("--alpha-tilde", alpha_tilde);
    cmd->add_option("--beta-tilde", beta_tilde);
    cmd->add_option("--lambda", lambda, "high-rank trade-off");
    cmd->add_option("--label-num", label_num);
    cmd->add_option("--epsilon-power", epsilon_power);
    cmd->add_option("--learning-rate", learning_rate);
    cmd->add_option("--epochs", epochs);
    cmd->add_option("--batch-size", batch_size);
    cmd->add_flag("--single-positive", single_positive,
                  "convert the training split to single-positive labels");
    cmd->add_flag("--correction", correction, "enable one-shot label correction");
  }

  json ToJson() const {
    json j = json::object();
    if (loss) j["loss"] = *loss;
    if (model) j["model"] = *model;
    if (alpha_tilde) j["alpha_tilde"] = *alpha_tilde;
    if (beta_tilde) j["beta_tilde"] = *beta_tilde;
    if (lambda) j["lambda"] = *lambda;
    if (label_num) j["label_num"] = *label_num;
    if (epsilon_power) j["epsilon_power"] = *epsilon_power;
    if (learning_rate) j["learning_rate"] = *learning_rate;
    if (epochs) j["epochs"] = *epochs;
    if (batch_size) j["batch_size"] = *batch_size;
    if (seed) j["seed"] = *seed;
    if (single_positive) j["single_positive"] = true;
    if (correction) j["correction"] = true;
    return j;
  }
};

RunConfig ResolveConfig(const std::string& config_path, const Overrides& ov) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  apply_config_json(ov.ToJson(), cfg);
  return cfg;
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

// Training pool, optional validation/test, and the split that produced them.
struct PreparedData {
  Dataset train;
  std::optional<Dataset> validation;
  std::optional<Dataset> test;
  std::optional<SplitIndices> split;
};

PreparedData PrepareData(const RunConfig& cfg, const std::string& data_path,
                         const std::string& val_path, const std::string& test_path) {
  PreparedData p;
  Rng data_rng(cfg.train.seed ^ kDataStreamSalt);
  Dataset pool = read_jsonl(data_path);
  if (!val_path.empty()) {
    p.train = std::move(pool);
    p.validation = read_jsonl(val_path);
  } else if (cfg.val_fraction > 0.0) {
    SplitIndices split = split_train_validation(pool.n_samples(), cfg.val_fraction, data_rng);
    p.train = pool.Subset(split.train);
    p.validation = pool.Subset(split.validation);
    p.split = std::move(split);
  } else {
    p.train = std::move(pool);
  }
  if (cfg.single_positive) p.train = to_single_positive(p.train, data_rng);
  if (!test_path.empty()) p.test = read_jsonl(test_path);
  return p;
}

TrainResult RunTraining(const RunConfig& cfg, const PreparedData& data) {
  Rng rng(cfg.train.seed);
  Model model = Model::Init(cfg.train.model, data.train.n_features(), data.train.n_labels(),
                            cfg.train.hidden_width, rng);
  return train(data.train, std::move(model), cfg.train, rng,
               data.validation ? &*data.validation : nullptr, data.test ? &*data.test : nullptr);
}

nlohmann::ordered_json ReportJson(const TrainResult& result, const RunConfig& cfg,
                                  const PreparedData& data) {
  auto j = run_report_to_json(result.report, cfg);
  if (data.split) {
    j["split"] = {{"train", data.split->train}, {"validation", data.split->validation}};
  } else {
    j["split"] = nullptr;
  }
  return j;
}

int CmdGenerate(const std::string& config_path, const Overrides& ov, const std::string& out_dir,
                double test_fraction, std::ostream& out) {
  RunConfig cfg = ResolveConfig(config_path, ov);
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ConfigError("--test-fraction must lie in [0, 1)");
  }
  Rng rng(cfg.train.seed);
  Dataset d;
  try {
    d = generate_synthetic(cfg.synthetic, rng);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  EnsureDir(out_dir);
  const auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(d.n_samples()) * test_fraction));
  std::vector<std::size_t> head(d.n_samples() - n_test), tail(n_test);
  std::iota(head.begin(), head.end(), std::size_t{0});
  std::iota(tail.begin(), tail.end(), head.size());
  write_jsonl(n_test ? d.Subset(head) : d, fs::path(out_dir) / "dataset.jsonl");
  if (n_test) write_jsonl(d.Subset(tail), fs::path(out_dir) / "test.jsonl");

  nlohmann::ordered_json meta;
  meta["seed"] = cfg.train.seed;
  meta["n_samples"] = cfg.synthetic.n_samples;
  meta["n_features"] = cfg.synthetic.n_features;
  meta["n_labels"] = cfg.synthetic.n_labels;
  meta["labels_per_sample_mean"] = cfg.synthetic.labels_per_sample_mean;
  meta["noise_sd"] = cfg.synthetic.noise_sd;
  meta["test_fraction"] = test_fraction;
  meta["rng"] = "splitmix64";
  write_text(fs::path(out_dir) / "dataset.meta.json", meta.dump(2) + "\n");
  out << "wrote " << (d.n_samples() - n_test) << " samples to "
      << (fs::path(out_dir) / "dataset.jsonl").string();
  if (n_test) out << " and " << n_test << " to " << (fs::path(out_dir) / "test.jsonl").string();
  out << '\n';
  return kExitOk;
}

int CmdConvert(const std::string& in_path, const std::string& out_path, bool single_positive,
               bool assume_neg, std::uint64_t seed, std::ostream& out) {
  Dataset d = read_jsonl(in_path);
  if (single_positive) {
    Rng rng(seed);
    d = to_single_positive(d, rng);
  }
  if (assume_neg) d = assume_negative(d);
  write_jsonl(d, out_path);
  out << "wrote " << d.n_samples() << " samples to " << out_path << '\n';
  return kExitOk;
}

int CmdTrain(const RunConfig& cfg, const std::string& data_path, const std::string& val_path,
             const std::string& test_path, const std::string& out_dir, std::ostream& out) {
  PreparedData data = PrepareData(cfg, data_path, val_path, test_path);
  TrainResult result = RunTraining(cfg, data);
  EnsureDir(out_dir);
  write_text(fs::path(out_dir) / "report.json", ReportJson(result, cfg, data).dump(2) + "\n");
  write_text(fs::path(out_dir) / "curves.csv", curves_csv(result.report));
  save_model(result.model, fs::path(out_dir) / "model.json");
  const auto& last = result.report.epochs.back();
  out << "epochs " << result.report.epochs.size() << ", final train loss "
      << last.train_loss;
  if (last.val_map) out << ", val mAP " << *last.val_map;
  if (last.test_map) out << ", test mAP " << *last.test_map;
  out << "\nreport: " << (fs::path(out_dir) / "report.json").string() << '\n';
  return kExitOk;
}

int CmdEval(const std::string& model_path, const std::string& data_path,
            const std::string& out_path, double bin_width, std::ostream& out) {
  const Model model = load_model(model_path);
  const Dataset data = read_jsonl(data_path);
  if (data.n_features() != model.n_features() || data.n_labels() != model.n_labels()) {
    throw DataError("eval: model and data dimensions differ");
  }
  const std::string text = evaluation_to_json(evaluate(model, data, bin_width), bin_width).dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    write_text(out_path, text);
  }
  return kExitOk;
}

int CmdGradcheck(const RunConfig& cfg, double threshold, std::ostream& out) {
  Rng rng(cfg.train.seed);
  SyntheticConfig syn;
  syn.n_samples = 12;
  syn.n_features = 5;
  syn.n_labels = 6;
  syn.labels_per_sample_mean = 2.0;
  syn.noise_sd = 0.5;
  const Dataset sp = to_single_positive(generate_synthetic(syn, rng), rng);

  bool all_pass = true;
  out << std::left << std::setw(11) << "loss" << std::setw(8) << "model" << std::setw(8)
      << "lambda" << std::setw(14) << "max_rel_err" << std::setw(9) << "skipped" << "result\n";
  for (LossKind kind : {LossKind::kBce, LossKind::kFocal, LossKind::kAsymmetric, LossKind::kZlpr,
                        LossKind::kOpml, LossKind::kSoftOpml}) {
    for (ModelKind mk : {ModelKind::kLinear, ModelKind::kMlp}) {
      for (double lambda : {0.0, 1e-3}) {
        const Model model = Model::Init(mk, syn.n_features, syn.n_labels, 8, rng);
        LossSpec spec = cfg.train.loss;
        spec.kind = kind;
        HighRankConfig hr = cfg.train.high_rank;
        hr.lambda = lambda;
        const Matrix scores = model.Scores(sp.features);
        Matrix probs(scores.rows(), scores.cols());
        for (std::size_t k = 0; k < scores.size(); ++k) probs.data()[k] = sigmoid(scores.data()[k]);
        const auto ap = observed_average_precision(scores, assume_negative(sp.observed));
        const Matrix gamma =
            smoothing_weights(probs, ap.per_class_ap, cfg.train.correction_cfg.epsilon_power);
        const GradCheckReport rep = grad_check(model, sp.features, sp.observed,
                                               kind == LossKind::kSoftOpml ? &gamma : nullptr,
                                               spec, hr);
        const bool pass = rep.max_rel_error < threshold;
        all_pass = all_pass && pass;
        std::ostringstream err;
        err << std::scientific << std::setprecision(3) << rep.max_rel_error;
        out << std::left << std::setw(11) << LossName(kind) << std::setw(8) << ModelName(mk)
            << std::setw(8) << lambda << std::setw(14) << err.str() << std::setw(9) << rep.skipped
            << (pass ? "PASS" : "FAIL")
            << '\n';
      }
    }
  }
  out << (all_pass ? "all gradient checks passed" : "gradient check FAILED") << '\n';
  return all_pass ? kExitOk : kExitNumerical;
}

// Grid file: {"base": {<config keys>}, "grid": {"<key>": [values...], ...}}.
int CmdSweep(const std::string& grid_path, const Overrides& ov, const std::string& data_path,
             const std::string& val_path, const std::string& test_path,
             const std::string& out_dir, std::ostream& out) {
  std::ifstream in(grid_path);
  if (!in) throw ConfigError("cannot open grid config " + grid_path);
  json grid_file;
  try {
    grid_file = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("grid config: ") + e.what());
  }
  if (!grid_file.is_object()) throw ConfigError("grid config must be an object");
  for (const auto& [key, value] : grid_file.items()) {
    if (key != "base" && key != "grid") throw ConfigError("unknown grid config key \"" + key + "\"");
  }
  RunConfig base;
  if (grid_file.contains("base")) apply_config_json(grid_file["base"], base);
  apply_config_json(ov.ToJson(), base);
  const json grid = grid_file.value("grid", json::object());
  if (!grid.is_object()) throw ConfigError("\"grid\" must be an object of arrays");

  std::vector<std::pair<std::string, std::vector<json>>> axes;
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) {
      throw ConfigError("grid key \"" + key + "\" needs a non-empty array");
    }
    axes.emplace_back(key, std::vector<json>(values.begin(), values.end()));
  }

  std::vector<json> trials(1, json::object());
  for (const auto& [key, values] : axes) {
    std::vector<json> next;
    for (const json& partial : trials) {
      for (const json& v : values) {
        json t = partial;
        t[key] = v;
        next.push_back(std::move(t));
      }
    }
    trials = std::move(next);
  }

  EnsureDir(out_dir);
  nlohmann::ordered_json summary;
  summary["base_config"] = config_to_json(base);
  auto rows = nlohmann::ordered_json::array();
  std::optional<std::size_t> best;
  double best_val = -1.0;
  std::ostringstream csv;
  csv << "trial";
  for (const auto& [key, values] : axes) csv << ',' << key;
  csv << ",best_val_map,test_map_at_best_val,final_test_map,best\n";
  std::vector<std::string> csv_rows;

  for (std::size_t t = 0; t < trials.size(); ++t) {
    RunConfig cfg = base;
    apply_config_json(trials[t], cfg);
    const PreparedData data = PrepareData(cfg, data_path, val_path, test_path);
    const TrainResult result = RunTraining(cfg, data);
    std::ostringstream name;
    name << "trial_" << std::setw(3) << std::setfill('0') << t;
    const fs::path trial_dir = fs::path(out_dir) / name.str();
    EnsureDir(trial_dir);
    write_text(trial_dir / "report.json", ReportJson(result, cfg, data).dump(2) + "\n");

    const RunReport& r = result.report;
    nlohmann::ordered_json row;
    row["trial"] = t;
    row["overrides"] = trials[t];
    row["best_val_map"] = r.best_val_map ? json(*r.best_val_map) : json(nullptr);
    row["test_map_at_best_val"] =
        r.test_map_at_best_val ? json(*r.test_map_at_best_val) : json(nullptr);
    row["final_test_map"] = r.epochs.back().test_map ? json(*r.epochs.back().test_map) : json(nullptr);
    rows.push_back(std::move(row));
    if (r.best_val_map && *r.best_val_map > best_val) {
      best_val = *r.best_val_map;
      best = t;
    }
    std::ostringstream line;
    line << t;
    for (const auto& [key, values] : axes) line << ',' << trials[t][key].dump();
    line << ',' << (r.best_val_map ? std::to_string(*r.best_val_map) : "") << ','
         << (r.test_map_at_best_val ? std::to_string(*r.test_map_at_best_val) : "") << ','
         << (r.epochs.back().test_map ? std::to_string(*r.epochs.back().test_map) : "");
    csv_rows.push_back(line.str());
  }
  for (std::size_t t = 0; t < rows.size(); ++t) {
    rows[t]["best"] = best && *best == t;
    csv << csv_rows[t] << ',' << (best && *best == t ? "*" : "") << '\n';
  }
  summary["trials"] = std::move(rows);
  summary["best_trial"] = best ? json(*best) : json(nullptr);
  write_text(fs::path(out_dir) / "sweep.json", summary.dump(2) + "\n");
  write_text(fs::path(out_dir) / "sweep.csv", csv.str());
  out << csv.str();
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ConfigureLoggingFromEnv();
  CLI::App app{"OPML multi-label loss laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_path, val_path, test_path, model_path, input_path;
  Overrides ov;
  double test_fraction = 0.0;
  double bin_width = 0.2;
  double threshold = 1e-4;
  bool assume_neg = false;
  std::uint64_t seed = 0;

  auto* gen = app.add_subcommand("generate", "write a synthetic multi-label dataset");
  gen->add_option("--config", config_path);
  gen->add_option("--seed", ov.seed);
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--test-fraction", test_fraction,
                  "trailing fraction of samples written to test.jsonl");

  auto* conv = app.add_subcommand("convert", "single-positive / assume-negative transforms");
  conv->add_option("--input", input_path)->required();
  conv->add_option("--out", out_dir, "output dataset file")->required();
  conv->add_option("--seed", seed);
  conv->add_flag("--single-positive", ov.single_positive);
  conv->add_flag("--assume-negative", assume_neg);

  auto* trn = app.add_subcommand("train", "train a model and write report/curves/model");
  trn->add_option("--config", config_path);
  trn->add_option("--seed", ov.seed);
  trn->add_option("--data", data_path, "training pool (JSONL)")->required();
  trn->add_option("--val", val_path, "validation set; default is a seeded split of --data");
  trn->add_option("--test", test_path, "test set");
  trn->add_option("--out", out_dir, "output directory")->required();
  ov.Register(trn);

  auto* evl = app.add_subcommand("eval", "evaluate a saved model");
  evl->add_option("--model", model_path)->required();
  evl->add_option("--data", data_path)->required();
  evl->add_option("--out", out_dir, "output file; stdout when omitted");
  evl->add_option("--bin-width", bin_width);

  auto* gck = app.add_subcommand("gradcheck", "backprop vs finite differences for every loss");
  gck->add_option("--config", config_path);
  gck->add_option("--seed", ov.seed);
  gck->add_option("--threshold", threshold);

  auto* swp = app.add_subcommand("sweep", "grid search selected by validation mAP");
  swp->add_option("--config", config_path, "grid config")->required();
  swp->add_option("--seed", ov.seed);
  swp->add_option("--data", data_path)->required();
  swp->add_option("--val", val_path);
  swp->add_option("--test", test_path);
  swp->add_option("--out", out_dir)->required();
  ov.Register(swp);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return kExitConfig;
  }

  try {
    if (gen->parsed()) return CmdGenerate(config_path, ov, out_dir, test_fraction, out);
    if (conv->parsed()) {
      return CmdConvert(input_path, out_dir, ov.single_positive, assume_neg, seed, out);
    }
    if (trn->parsed()) {
      const RunConfig cfg = ResolveConfig(config_path, ov);
      cfg.train.Validate();
      return CmdTrain(cfg, data_path, val_path, test_path, out_dir, out);
    }
    if (evl->parsed()) return CmdEval(model_path, data_path, out_dir, bin_width, out);
    if (gck->parsed()) return CmdGradcheck(ResolveConfig(config_path, ov), threshold, out);
    if (swp->parsed()) {
      return CmdSweep(config_path, ov, data_path, val_path, test_path, out_dir, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace opml
