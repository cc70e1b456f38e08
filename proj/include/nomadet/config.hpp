#pragma once

// JSON conversions for scenarios, preprocessing, training and experiment configs.
// Missing keys keep their defaults; unknown keys are rejected with UsageError.

#include <filesystem>

#include <nlohmann/json.hpp>
#include "nomadet/datapipe.hpp"
#include "nomadet/harness.hpp"

namespace nomadet {

using Json = nlohmann::ordered_json;

Json to_json(const NomaScenario& s);
Json to_json(const Preprocess& p);
Json to_json(const WaveletSpec& w);
Json to_json(const nn::TrainConfig& t);
Json to_json(const ExperimentConfig& c);
Json to_json(const ResultRow& r);

NomaScenario scenario_from_json(const Json& j);
Preprocess preprocess_from_json(const Json& j);
WaveletSpec wavelet_from_json(const Json& j);
nn::TrainConfig train_from_json(const Json& j);
ExperimentConfig experiment_from_json(const Json& j);
ResultRow row_from_json(const Json& j);

ExperimentConfig load_experiment(const std::filesystem::path& path);
void save_experiment(const ExperimentConfig& cfg, const std::filesystem::path& path);

}  // namespace nomadet
