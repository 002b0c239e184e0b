#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neurolock/dsp.hpp"
#include "neurolock/ingest.hpp"

namespace neurolock {

enum class FeatureKind { Graph, AR, PSD, FuzzEn, Concat };

std::string_view to_string(FeatureKind k) noexcept;
FeatureKind parse_feature_kind(std::string_view name);

/// Per-frame features of one subject under the two fused protocols.
struct SubjectFeatures {
  std::string subject_id;
  std::vector<std::vector<double>> first;   // protocol 1 (e.g. EO), per frame
  std::vector<std::vector<double>> second;  // protocol 2 (e.g. EC), per frame

  std::size_t frame_count() const noexcept { return std::min(first.size(), second.size()); }
};

struct FeatureDataset {
  FeatureKind kind = FeatureKind::Graph;
  Protocol first_protocol = Protocol::EO;
  Protocol second_protocol = Protocol::EC;
  std::size_t dim = 0;
  std::vector<SubjectFeatures> subjects;
};

struct FeatureConfig {
  DspConfig dsp;
  FeatureKind kind = FeatureKind::Graph;
  std::size_t rho_bins = 0;  // 0: default rule
  std::uint64_t seed = 1;    // Louvain seeds derive from it
};

/// Per-frame features of one recording, in frame order. `subject_index`
/// keys the per-frame Louvain seeds.
std::vector<std::vector<double>> extract_recording_features(const Recording& rec,
                                                            const FeatureConfig& cfg,
                                                            std::size_t subject_index);

/// Groups recordings by subject id (first-seen order) and pairs the two
/// protocols. With first == second both slots hold the same features
/// (single-protocol evaluation). Subjects missing a protocol are skipped.
FeatureDataset build_dataset(const std::vector<Recording>& recordings, const FeatureConfig& cfg,
                             Protocol first = Protocol::EO, Protocol second = Protocol::EC);

/// Mean feature vector over the first `frames` frames (both protocols
/// concatenated: first then second).
std::vector<double> mean_features(const SubjectFeatures& s, std::size_t frames);

}  // namespace neurolock
