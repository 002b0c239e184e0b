#include "neurolock/pipeline.hpp"

#include <map>

#include "neurolock/baseline_features.hpp"
#include "neurolock/connectivity.hpp"
#include "neurolock/error.hpp"
#include "neurolock/graph_features.hpp"
#include "neurolock/rng.hpp"

namespace neurolock {

std::string_view to_string(FeatureKind k) noexcept {
  switch (k) {
    case FeatureKind::Graph: return "graph";
    case FeatureKind::AR: return "ar";
    case FeatureKind::PSD: return "psd";
    case FeatureKind::FuzzEn: return "fuzzen";
    case FeatureKind::Concat: return "concat";
  }
  return "graph";
}

FeatureKind parse_feature_kind(std::string_view name) {
  for (FeatureKind k : {FeatureKind::Graph, FeatureKind::AR, FeatureKind::PSD,
                        FeatureKind::FuzzEn, FeatureKind::Concat})
    if (name == to_string(k)) return k;
  throw ConfigError("unknown feature kind '" + std::string(name) + "'");
}

std::vector<std::vector<double>> extract_recording_features(const Recording& rec,
                                                            const FeatureConfig& cfg,
                                                            std::size_t subject_index) {
  const PreprocessedRecording pre = preprocess(rec, cfg.dsp);
  const std::size_t frames = pre.band.size();
  std::vector<std::vector<double>> out(frames);
  const auto count = static_cast<std::ptrdiff_t>(frames);
  // Each frame writes its own slot, so the result is independent of
  // scheduling.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t ff = 0; ff < count; ++ff) {
    const auto f = static_cast<std::size_t>(ff);
    switch (cfg.kind) {
      case FeatureKind::Graph: {
        const ConnectivityGraph g = build_graph(instantaneous_phase(pre.band[f]), cfg.rho_bins);
        const std::uint64_t seed = derive_seed(cfg.seed, "louvain", subject_index, f,
                                               static_cast<std::uint64_t>(rec.protocol));
        out[f] = extract_features(g, seed).values;
        break;
      }
      case FeatureKind::AR: out[f] = ar_features(pre.broadband[f]).values; break;
      case FeatureKind::PSD: out[f] = psd_features(pre.broadband[f], rec.fs).values; break;
      case FeatureKind::FuzzEn: out[f] = fuzzen_features(pre.broadband[f]).values; break;
      case FeatureKind::Concat:
        out[f] = concat_baselines(ar_features(pre.broadband[f]),
                                  psd_features(pre.broadband[f], rec.fs),
                                  fuzzen_features(pre.broadband[f]))
                     .values;
        break;
    }
  }
  return out;
}

FeatureDataset build_dataset(const std::vector<Recording>& recordings, const FeatureConfig& cfg,
                             Protocol first, Protocol second) {
  FeatureDataset ds;
  ds.kind = cfg.kind;
  ds.first_protocol = first;
  ds.second_protocol = second;
  std::vector<std::string> order;
  std::map<std::string, std::pair<const Recording*, const Recording*>> by_subject;
  for (const auto& rec : recordings) {
    auto [it, inserted] = by_subject.try_emplace(rec.subject_id, nullptr, nullptr);
    if (inserted) order.push_back(rec.subject_id);
    if (rec.protocol == first) it->second.first = &rec;
    if (rec.protocol == second) it->second.second = &rec;
  }
  std::size_t index = 0;
  for (const auto& id : order) {
    const auto [a, b] = by_subject.at(id);
    const std::size_t subject_index = index++;
    if (!a || !b) continue;
    SubjectFeatures s;
    s.subject_id = id;
    s.first = extract_recording_features(*a, cfg, subject_index);
    s.second = a == b ? s.first : extract_recording_features(*b, cfg, subject_index);
    if (s.first.empty()) continue;
    if (ds.dim == 0) ds.dim = s.first.front().size();
    if (s.first.front().size() != ds.dim)
      throw ShapeError("subjects have different feature lengths (channel counts differ)");
    ds.subjects.push_back(std::move(s));
  }
  if (ds.subjects.empty()) throw EmptyRecording("no subject has both protocols");
  return ds;
}

std::vector<double> mean_features(const SubjectFeatures& s, std::size_t frames) {
  if (frames == 0 || frames > s.frame_count()) throw ConfigError("mean_features: bad frame count");
  const std::size_t dim = s.first.front().size();
  std::vector<double> out(2 * dim, 0.0);
  for (std::size_t f = 0; f < frames; ++f)
    for (std::size_t j = 0; j < dim; ++j) {
      out[j] += s.first[f][j];
      out[dim + j] += s.second[f][j];
    }
  for (double& v : out) v /= static_cast<double>(frames);
  return out;
}

}  // namespace neurolock
