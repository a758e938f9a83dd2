#pragma once

// JSON (de)serialization of trainer configs, synthetic targets and full
// experiment documents. Parsing is strict: unknown keys, wrong types and
// out-of-range values throw ConfigError naming the offending path.

#include "mwgan/gan.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mwgan::config {

using Json = nlohmann::ordered_json;

Json trainer_to_json(const gan::TrainerConfig& c);
gan::TrainerConfig trainer_from_json(const Json& j);

Json target_to_json(const gan::SyntheticTarget& t);
// `tag` comes from the enclosing trainer section.
gan::SyntheticTarget target_from_json(const Json& j, GeometryTag tag);

Json point_to_json(const ManifoldPoint& p);
ManifoldPoint point_from_json(const Json& j, GeometryTag tag, const std::string& where);

// Lists of MVI files used instead of a synthetic target.
struct DatasetSpec {
    std::vector<std::filesystem::path> train;
    std::vector<std::filesystem::path> heldout;
};

struct ExperimentConfig {
    gan::TrainerConfig trainer;
    std::optional<gan::SyntheticTarget> target; // exactly one of target / dataset
    std::optional<DatasetSpec> dataset;
    std::size_t n_train = 2048;
    std::filesystem::path output_dir = "run";
};

// Relative dataset and output paths are resolved against `base_dir`.
ExperimentConfig parse_experiment(const std::string& text, const std::filesystem::path& base_dir = {});
Json experiment_to_json(const ExperimentConfig& e);

} // namespace mwgan::config
