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

#include "opml/serialize.h"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "opml/errors.h"

namespace opml {

namespace {

using json = nlohmann::json;

template <typename T>
T Get(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError("");
    } else {
      if (!v.is_number()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key \"" + key + "\": wrong type or value " + v.dump());
  }
}

using Setter = std::function<void(const json&, RunConfig&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& Setters() {
  static const std::vector<std::pair<std::string, Setter>> setters = {
      {"loss", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.loss.kind = ParseLossKind(Get<std::string>(v, k));
       }},
      {"alpha_tilde", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.loss.alpha_tilde = Get<double>(v, k);
       }},
      {"beta_tilde", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.loss.beta_tilde = Get<double>(v, k);
       }},
      {"focal_gamma", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.loss.focal_gamma = Get<double>(v, k);
       }},
      {"asl_gamma_pos", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.loss.asl_gamma_pos = Get<double>(v, k);
       }},
      {"asl_gamma_neg", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.loss.asl_gamma_neg = Get<double>(v, k);
       }},
      {"asl_margin", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.loss.asl_margin = Get<double>(v, k);
       }},
      {"lambda", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.high_rank.lambda = Get<double>(v, k);
       }},
      {"hr_epsilon", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.high_rank.epsilon = Get<double>(v, k);
       }},
      {"correction", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.correction = Get<bool>(v, k);
       }},
      {"label_num", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.correction_cfg.label_num = Get<double>(v, k);
       }},
      {"epsilon_power", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.correction_cfg.epsilon_power = Get<double>(v, k);
       }},
      {"warmup_epochs", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.correction_cfg.warmup_epochs = Get<std::size_t>(v, k);
       }},
      {"correction_epoch", [](const json& v, RunConfig& c, const std::string& k) {
         if (v.is_null()) {
           c.train.correction_cfg.correction_epoch.reset();
         } else {
           c.train.correction_cfg.correction_epoch = Get<std::size_t>(v, k);
         }
       }},
      {"model", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.model = ParseModelKind(Get<std::string>(v, k));
       }},
      {"hidden_width", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.hidden_width = Get<std::size_t>(v, k);
       }},
      {"batch_size", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.batch_size = Get<std::size_t>(v, k);
       }},
      {"learning_rate", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.learning_rate = Get<double>(v, k);
       }},
      {"epochs", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.epochs = Get<std::size_t>(v, k);
       }},
      {"seed", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.seed = Get<std::uint64_t>(v, k);
       }},
      {"eval_each_epoch", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.eval_each_epoch = Get<bool>(v, k);
       }},
      {"stability_window_start", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.stability_window_start = Get<std::size_t>(v, k);
       }},
      {"histogram_bin_width", [](const json& v, RunConfig& c, const std::string& k) {
         c.train.histogram_bin_width = Get<double>(v, k);
       }},
      {"val_fraction", [](const json& v, RunConfig& c, const std::string& k) {
         c.val_fraction = Get<double>(v, k);
       }},
      {"single_positive", [](const json& v, RunConfig& c, const std::string& k) {
         c.single_positive = Get<bool>(v, k);
       }},
      {"n_samples", [](const json& v, RunConfig& c, const std::string& k) {
         c.synthetic.n_samples = Get<std::size_t>(v, k);
       }},
      {"n_features", [](const json& v, RunConfig& c, const std::string& k) {
         c.synthetic.n_features = Get<std::size_t>(v, k);
       }},
      {"n_labels", [](const json& v, RunConfig& c, const std::string& k) {
         c.synthetic.n_labels = Get<std::size_t>(v, k);
       }},
      {"labels_per_sample_mean", [](const json& v, RunConfig& c, const std::string& k) {
         c.synthetic.labels_per_sample_mean = Get<double>(v, k);
       }},
      {"noise_sd", [](const json& v, RunConfig& c, const std::string& k) {
         c.synthetic.noise_sd = Get<double>(v, k);
       }},
  };
  return setters;
}

template <typename T>
json Optional(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void apply_config_json(const nlohmann::json& obj, RunConfig& cfg) {
  if (!obj.is_object()) throw ConfigError("config must be a JSON object");
  const auto& setters = Setters();
  for (const auto& [key, value] : obj.items()) {
    auto it = std::find_if(setters.begin(), setters.end(),
                           [&](const auto& s) { return s.first == key; });
    if (it == setters.end()) throw ConfigError("unknown config key \"" + key + "\"");
    it->second(value, cfg, key);
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  RunConfig cfg;
  apply_config_json(obj, cfg);
  return cfg;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, setter] : Setters()) keys.push_back(key);
  return keys;
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  const TrainConfig& t = c.train;
  j["loss"] = LossName(t.loss.kind);
  j["alpha_tilde"] = t.loss.alpha_tilde;
  j["beta_tilde"] = t.loss.beta_tilde;
  j["focal_gamma"] = t.loss.focal_gamma;
  j["asl_gamma_pos"] = t.loss.asl_gamma_pos;
  j["asl_gamma_neg"] = t.loss.asl_gamma_neg;
  j["asl_margin"] = t.loss.asl_margin;
  j["lambda"] = t.high_rank.lambda;
  j["hr_epsilon"] = t.high_rank.epsilon;
  j["correction"] = t.correction;
  j["label_num"] = t.correction_cfg.label_num;
  j["epsilon_power"] = t.correction_cfg.epsilon_power;
  j["warmup_epochs"] = t.correction_cfg.warmup_epochs;
  j["correction_epoch"] = t.correction_cfg.ResolvedCorrectionEpoch(t.epochs);
  j["model"] = ModelName(t.model);
  j["hidden_width"] = t.hidden_width;
  j["batch_size"] = t.batch_size;
  j["learning_rate"] = t.learning_rate;
  j["epochs"] = t.epochs;
  j["seed"] = t.seed;
  j["eval_each_epoch"] = t.eval_each_epoch;
  j["stability_window_start"] = t.stability_window_start;
  j["histogram_bin_width"] = t.histogram_bin_width;
  j["val_fraction"] = c.val_fraction;
  j["single_positive"] = c.single_positive;
  j["n_samples"] = c.synthetic.n_samples;
  j["n_features"] = c.synthetic.n_features;
  j["n_labels"] = c.synthetic.n_labels;
  j["labels_per_sample_mean"] = c.synthetic.labels_per_sample_mean;
  j["noise_sd"] = c.synthetic.noise_sd;
  return j;
}

nlohmann::ordered_json ap_report_to_json(const ApReport& r) {
  nlohmann::ordered_json j;
  j["per_class_ap"] = r.per_class_ap;
  j["map"] = r.map;
  j["evaluated_classes"] = r.evaluated_classes;
  j["positives_per_class"] = r.positives_per_class;
  return j;
}

nlohmann::ordered_json evaluation_to_json(const Evaluation& ev, double bin_width) {
  nlohmann::ordered_json j = ap_report_to_json(ev.ap);
  j["histogram"] = {{"bin_width", bin_width}, {"counts", ev.histogram}};
  return j;
}

nlohmann::ordered_json run_report_to_json(const RunReport& r, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["config"] = config_to_json(cfg);
  auto epochs = nlohmann::ordered_json::array();
  for (const EpochRecord& e : r.epochs) {
    nlohmann::ordered_json row;
    row["epoch"] = e.epoch;
    row["train_loss"] = e.train_loss;
    row["val_map"] = Optional(e.val_map);
    row["test_map"] = Optional(e.test_map);
    epochs.push_back(std::move(row));
  }
  j["epochs"] = std::move(epochs);
  j["best_epoch"] = Optional(r.best_epoch);
  j["best_val_map"] = Optional(r.best_val_map);
  j["test_map_at_best_val"] = Optional(r.test_map_at_best_val);
  j["val_map_std"] = Optional(r.val_map_std);
  j["final"] = r.final_eval
                   ? nlohmann::ordered_json(evaluation_to_json(
                         *r.final_eval, cfg.train.histogram_bin_width))
                   : nlohmann::ordered_json(nullptr);
  auto flips = nlohmann::ordered_json::array();
  for (const FlipLogEntry& f : r.flips) {
    flips.push_back({{"epoch", f.epoch}, {"sample", f.sample}, {"class", f.label},
                     {"score", f.score}});
  }
  j["flips"] = std::move(flips);
  if (r.correction) {
    nlohmann::ordered_json c;
    c["epoch"] = r.correction->epoch;
    c["training_ap"] = r.correction->training_ap;
    c["cor_ratio"] = r.correction->cor_ratio;
    c["counts"] = r.correction->counts;
    j["correction"] = std::move(c);
  } else {
    j["correction"] = nullptr;
  }
  return j;
}

std::string curves_csv(const RunReport& r) {
  std::ostringstream out;
  out << "epoch,train_loss,val_map,test_map\n";
  for (const EpochRecord& e : r.epochs) {
    out << e.epoch << ',' << FormatDouble(e.train_loss) << ','
        << (e.val_map ? FormatDouble(*e.val_map) : "") << ','
        << (e.test_map ? FormatDouble(*e.test_map) : "") << '\n';
  }
  return out.str();
}

std::string model_to_json(const Model& model) {
  std::ostringstream out;
  out << "{\"kind\":\"" << ModelName(model.kind) << "\",\"n_features\":" << model.n_features()
      << ",\"n_labels\":" << model.n_labels() << ",\"hidden_width\":" << model.hidden_width()
      << ",\"blocks\":[";
  const auto names = model.BlockNames();
  const auto blocks = model.Blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (b) out << ',';
    out << "{\"name\":\"" << names[b] << "\",\"rows\":" << blocks[b]->rows()
        << ",\"cols\":" << blocks[b]->cols() << ",\"values\":[";
    const auto& values = blocks[b]->data();
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (k) out << ',';
      out << FormatDouble(values[k]);
    }
    out << "]}";
  }
  out << "]}\n";
  return out.str();
}

Model model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
    Model m;
    m.kind = ParseModelKind(j.at("kind").get<std::string>());
    const auto& blocks = j.at("blocks");
    auto targets = m.Blocks();
    const auto names = m.BlockNames();
    if (blocks.size() != targets.size()) throw DataError("model: wrong number of blocks");
    for (std::size_t b = 0; b < targets.size(); ++b) {
      const auto& blk = blocks[b];
      if (blk.at("name").get<std::string>() != names[b]) {
        throw DataError("model: expected block " + names[b]);
      }
      *targets[b] = Matrix(blk.at("rows").get<std::size_t>(), blk.at("cols").get<std::size_t>(),
                           blk.at("values").get<std::vector<double>>());
    }
    if (m.n_features() != j.at("n_features").get<std::size_t>() ||
        m.n_labels() != j.at("n_labels").get<std::size_t>()) {
      throw DataError("model: header dimensions disagree with blocks");
    }
    if (m.kind == ModelKind::kMlp &&
        (m.w2.rows() != m.w1.cols() || m.b1.cols() != m.w1.cols() || m.b2.cols() != m.w2.cols())) {
      throw DataError("model: inconsistent layer shapes");
    }
    if (m.kind == ModelKind::kLinear && m.b1.cols() != m.w1.cols()) {
      throw DataError("model: inconsistent bias shape");
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  } catch (const DataError&) {
    throw;
  } catch (const Error& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  write_text(path, model_to_json(model));
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace opml
