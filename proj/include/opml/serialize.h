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

#ifndef OPML_SERIALIZE_H_
#define OPML_SERIALIZE_H_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "opml/labels.h"
#include "opml/metrics.h"
#include "opml/trainer.h"

namespace opml {

// Every setting any command understands. Config files are flat JSON objects
// whose keys are the field names below; unknown keys are rejected.
struct RunConfig {
  TrainConfig train;
  SyntheticConfig synthetic;
  double val_fraction = 0.2;
  bool single_positive = false;
};

// Overlays the keys of `obj` onto `cfg`. Throws ConfigError naming the key on
// unknown keys or ill-typed values.
void apply_config_json(const nlohmann::json& obj, RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const RunConfig& cfg);
// Keys accepted by apply_config_json, in echo order.
std::vector<std::string> config_keys();

nlohmann::ordered_json ap_report_to_json(const ApReport& report);
nlohmann::ordered_json evaluation_to_json(const Evaluation& ev, double bin_width);
nlohmann::ordered_json run_report_to_json(const RunReport& report, const RunConfig& cfg);

// epoch,train_loss,val_map,test_map; missing values are empty fields.
std::string curves_csv(const RunReport& report);

// {"kind", "n_features", "n_labels", "hidden_width", "blocks": [{"name",
// "rows", "cols", "values"}]} with 17 significant digits per value.
std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace opml

#endif  // OPML_SERIALIZE_H_
