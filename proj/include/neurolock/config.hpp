#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurolock/attacks.hpp"
#include "neurolock/ingest.hpp"
#include "neurolock/matching_eval.hpp"
#include "neurolock/pipeline.hpp"

namespace neurolock {

using json = nlohmann::json;

inline constexpr const char* kVersion = NEUROLOCK_VERSION;
inline constexpr int kConfigSchema = 1;

/// Every key the run configuration accepts, with its default value.
json default_config();

/// Defaults merged with `user` (a JSON object). Unknown keys and values of
/// the wrong type raise ConfigError.
json merge_config(const json& user);

/// `path` is a dotted key such as "transform.delta"; `value` is read as JSON
/// when it parses, otherwise as a string. Types are checked here; call
/// validate_config once all overrides are in.
void apply_override(json& cfg, std::string_view path, std::string_view value);

/// Checks types against the defaults and value ranges.
void validate_config(const json& cfg);

/// FNV-1a of the canonical dump, as 16 hex digits.
std::string config_hash(const json& cfg);

std::uint64_t master_seed(const json& cfg);
SyntheticSpec synthetic_spec(const json& cfg);
FeatureConfig feature_config(const json& cfg);
EvalSettings eval_settings(const json& cfg);
AttackConfig attack_config(const json& cfg, AttackCase attack_case, double threshold);

/// Recordings named by the dataset section: a synthetic cohort, or every
/// .edf / .csv file of a directory in name order. File names are either
/// <subject>_<PROTOCOL>.<ext> or the PhysioNet motor/imagery layout
/// S001R01.edf (R01 eyes open, R02 eyes closed, odd runs from 3 executed
/// movement, even runs from 4 imagined movement).
std::vector<Recording> load_recordings(const json& cfg);

/// Subject id and protocol from a recording file name.
std::pair<std::string, Protocol> parse_recording_name(const std::string& stem);

/// Features for the configured protocols: read from `features.dir` when it
/// holds a manifest, otherwise extracted from the recordings.
FeatureDataset load_features(const json& cfg);

/// Writes manifest.json and <subject>_<PROTOCOL>.csv (frames x dim) per
/// subject and protocol. Returns the files written.
std::vector<std::filesystem::path> write_feature_dir(const std::filesystem::path& dir,
                                                     const FeatureDataset& ds);
FeatureDataset read_feature_dir(const std::filesystem::path& dir);

}  // namespace neurolock
