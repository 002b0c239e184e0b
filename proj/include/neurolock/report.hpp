#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "neurolock/attacks.hpp"
#include "neurolock/matching_eval.hpp"
#include "neurolock/sl_eval.hpp"

namespace neurolock {

/// Fields every report carries: kind, version, config hash and seeds.
nlohmann::json report_header(const std::string& kind, const nlohmann::json& cfg);

nlohmann::json to_json(const Summary& s);
nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const AttackReport& r);
nlohmann::json to_json(const ArmResult& r);
nlohmann::json to_json(const std::vector<PitfallRow>& rows);

std::string roc_csv(const std::vector<RocPoint>& roc);
/// One row per bin of [0, 1]: bin centre and the density of every list.
std::string histogram_csv(const std::vector<std::pair<std::string, const std::vector<double>*>>& lists,
                          std::size_t bins = 50);
std::string unlinkability_csv(const UnlinkabilityResult& u);
/// user, attempt (1-based), score.
std::string trace_csv(const AttackReport& r);
std::string pitfall_csv(const std::vector<PitfallRow>& rows);

}  // namespace neurolock
