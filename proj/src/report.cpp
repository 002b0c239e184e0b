#include "neurolock/report.hpp"

#include <algorithm>
#include <charconv>

#include "neurolock/config.hpp"
#include "neurolock/rng.hpp"

namespace neurolock {

namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

nlohmann::json report_header(const std::string& kind, const nlohmann::json& cfg) {
  const std::uint64_t seed = master_seed(cfg);
  return {{"report", kind},
          {"version", kVersion},
          {"schema", 1},
          {"config_hash", config_hash(cfg)},
          {"seed", seed},
          {"seeds",
           {{"features", derive_seed(seed, "features")},
            {"keys", derive_seed(seed, "keys")},
            {"attack", derive_seed(seed, "attack")}}}};
}

nlohmann::json to_json(const Summary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"count", s.count}};
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j = {
      {"subjects", r.n_subjects},
      {"genuine_tests", r.genuine_tests},
      {"impostor_tests", r.impostor_tests},
      {"eer", r.eer.eer},
      {"threshold_at_eer", r.eer.threshold},
      {"far_at_eer", r.eer.far},
      {"frr_at_eer", r.eer.frr},
      {"roc_points", r.roc.size()},
      {"genuine", to_json(r.genuine)},
      {"impostor", to_json(r.impostor)},
      {"pseudo_impostor", to_json(r.pseudo_impostor)},
      {"mated", to_json(r.mated)},
      {"non_mated", to_json(r.non_mated)},
      {"d_sys", r.unlinkability.d_sys},
  };
  if (r.decidability) {
    j["decidability"] = {{"d_prime", r.decidability->d_prime},
                         {"magnitude", r.decidability->magnitude},
                         {"orientation", "distance scores: genuine mean below impostor mean gives d' < 0"},
                         {"genuine", to_json(r.decidability_genuine)},
                         {"impostor", to_json(r.decidability_impostor)}};
  }
  return j;
}

nlohmann::json to_json(const AttackReport& r) {
  nlohmann::json users = nlohmann::json::array();
  for (const auto& ua : r.per_user) {
    nlohmann::json u = {{"user", ua.outcome.user},
                        {"success", ua.outcome.success},
                        {"attempts", ua.outcome.attempts},
                        {"starts", ua.outcome.starts},
                        {"best_score", ua.outcome.best_score}};
    if (ua.similarity) u["similarity"] = *ua.similarity;
    if (ua.second)
      u["second_attack"] = {{"tests", ua.second->tests},
                            {"successes", ua.second->successes},
                            {"scores", to_json(ua.second->scores)}};
    users.push_back(u);
  }
  return {{"case", std::string(to_string(r.attack_case))},
          {"threshold", r.threshold},
          {"users", r.users},
          {"successes", r.successes},
          {"success_rate", r.success_rate},
          {"mean_attempts", r.mean_attempts},
          {"similarity", to_json(r.similarity)},
          {"second_attack",
           {{"tests", r.second_tests},
            {"successes", r.second_successes},
            {"sar", r.sar},
            {"scores", to_json(r.second_scores)}}},
          {"per_user", users}};
}

nlohmann::json to_json(const ArmResult& r) {
  nlohmann::json j = {{"equations", r.equations},
                      {"unknowns", r.unknowns},
                      {"rank", r.rank},
                      {"underdetermined", r.rank < r.unknowns},
                      {"residual", r.residual}};
  if (r.similarity) j["similarity"] = *r.similarity;
  return j;
}

nlohmann::json to_json(const std::vector<PitfallRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows)
    arr.push_back({{"method", r.method},
                   {"evaluation", r.evaluation},
                   {"accuracy", r.accuracy},
                   {"far", r.far},
                   {"frr", r.frr},
                   {"classifier_eer", r.classifier_eer}});
  return arr;
}

std::string roc_csv(const std::vector<RocPoint>& roc) {
  std::string out = "threshold,far,frr\n";
  for (const auto& p : roc) out += num(p.threshold) + "," + num(p.far) + "," + num(p.frr) + "\n";
  return out;
}

std::string histogram_csv(const std::vector<std::pair<std::string, const std::vector<double>*>>& lists,
                          std::size_t bins) {
  std::string out = "bin_center";
  std::vector<std::vector<double>> dens;
  const double width = 1.0 / static_cast<double>(bins);
  for (const auto& [name, values] : lists) {
    out += "," + name;
    std::vector<double> h(bins, 0.0);
    for (double v : *values)
      h[std::min(bins - 1, static_cast<std::size_t>(std::clamp(v, 0.0, 1.0) / width))] += 1.0;
    if (!values->empty())
      for (double& x : h) x /= static_cast<double>(values->size()) * width;
    dens.push_back(std::move(h));
  }
  out += "\n";
  for (std::size_t b = 0; b < bins; ++b) {
    out += num((static_cast<double>(b) + 0.5) * width);
    for (const auto& h : dens) out += "," + num(h[b]);
    out += "\n";
  }
  return out;
}

std::string unlinkability_csv(const UnlinkabilityResult& u) {
  std::string out = "score,mated_density,non_mated_density,d_local\n";
  for (std::size_t b = 0; b < u.bin_centers.size(); ++b)
    out += num(u.bin_centers[b]) + "," + num(u.mated_density[b]) + "," +
           num(u.non_mated_density[b]) + "," + num(u.d_local[b]) + "\n";
  return out;
}

std::string trace_csv(const AttackReport& r) {
  std::string out = "user,attempt,score\n";
  for (const auto& ua : r.per_user)
    for (std::size_t k = 0; k < ua.outcome.trace.size(); ++k)
      out += std::to_string(ua.outcome.user) + "," + std::to_string(k + 1) + "," +
             num(ua.outcome.trace[k]) + "\n";
  return out;
}

std::string pitfall_csv(const std::vector<PitfallRow>& rows) {
  std::string out = "method,evaluation,accuracy,far,frr,classifier_eer\n";
  for (const auto& r : rows)
    out += r.method + ",\"" + r.evaluation + "\"," + num(r.accuracy) + "," + num(r.far) + "," +
           num(r.frr) + "," + num(r.classifier_eer) + "\n";
  return out;
}

}  // namespace neurolock
