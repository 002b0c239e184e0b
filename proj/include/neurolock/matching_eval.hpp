#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "neurolock/matrix.hpp"
#include "neurolock/pipeline.hpp"
#include "neurolock/transform.hpp"

namespace neurolock {

/// Distance scores (lower = more similar) in [0, 1].
struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
  std::vector<double> pseudo_impostor;
  std::vector<double> mated;
  std::vector<double> non_mated;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

/// FAR(t) = share of impostor scores <= t; FRR(t) = share of genuine
/// scores > t.
double false_accept_rate(const std::vector<double>& impostor, double threshold);
double false_reject_rate(const std::vector<double>& genuine, double threshold);

/// Sweeps every distinct score as threshold and picks the one minimising
/// |FAR - FRR| (smallest threshold on ties); EER is the FAR/FRR midpoint there.
EerResult eer(const std::vector<double>& genuine, const std::vector<double>& impostor);

struct RocPoint {
  double threshold, far, frr;
};
std::vector<RocPoint> roc_curve(const std::vector<double>& genuine,
                                const std::vector<double>& impostor);

struct Decidability {
  double d_prime = 0.0;    // signed: negative when genuine distances are smaller
  double magnitude = 0.0;  // |d'|
};
/// (m_genuine - m_impostor) / sqrt((s_g^2 + s_i^2) / 2), population std.
Decidability decidability(const std::vector<double>& genuine, const std::vector<double>& impostor);

struct Summary {
  double mean = 0.0, std = 0.0;
  std::size_t count = 0;
};
Summary summarize(const std::vector<double>& v);

/// One verification attempt against `user`'s enrolled template, using
/// `frames` consecutive frames of `query_subject` starting at `first_frame`.
struct Trial {
  std::size_t user = 0;
  std::size_t query_subject = 0;
  std::size_t first_frame = 0;
  std::size_t frames = 1;
};

struct ProtocolPlan {
  std::size_t enroll_frames = 0;
  std::vector<Trial> genuine;
  std::vector<Trial> impostor;
};

/// Enrolment on frames [0, F_e); genuine queries are the following
/// floor((n - F_e) / F_t) groups of F_t frames; each user gets one impostor
/// query from every other subject (that subject's first query group).
ProtocolPlan protocol_tests(const std::vector<std::size_t>& frames_per_subject,
                            std::size_t enroll_frames, std::size_t test_frames);

/// How the per-dimension quantization range of a template is fixed.
enum class QuantPolicy {
  Enrollment,  // from the user's own enrolment frames
  Population,  // from the enrolment frames of every enrolled subject, under the user's key
};

std::string_view to_string(QuantPolicy p) noexcept;
QuantPolicy parse_quant_policy(std::string_view name);

enum class KeyPolicy {
  Shared,   // one key for every user (stolen-key scenario)
  PerUser,  // independent key per user
};

struct EvalSettings {
  std::size_t enroll_frames = 10;
  std::size_t test_frames = 1;
  double delta = 0.5;
  KeyPolicy key_policy = KeyPolicy::Shared;
  std::uint64_t master_key = 1;
  ProjectionDistribution projection = ProjectionDistribution::Uniform;
  QuantPolicy quant_policy = QuantPolicy::Population;
};

std::string_view to_string(KeyPolicy p) noexcept;
KeyPolicy parse_key_policy(std::string_view name);

std::uint64_t user_key(const EvalSettings& s, std::size_t user);
TransformParams user_params(const EvalSettings& s, std::size_t user, std::size_t dim);

/// Quantization range for `user` under `params` according to the policy.
QuantRange quant_range_for(const FeatureDataset& ds, const EvalSettings& s, std::size_t user,
                           const TransformParams& params);

/// Enrolled template of every subject.
std::vector<CancellableTemplate> enroll_all(const FeatureDataset& ds, const EvalSettings& s);

/// Genuine and impostor scores for protocol_tests(ds, F_e, F_t).
ScoreSet protocol_scores(const FeatureDataset& ds, const EvalSettings& s);

/// Single-frame templates of one user scored pairwise (n choose 2 genuine)
/// and against every frame of every other subject (n * (S - 1) * n_other
/// impostor). All templates use the user's key and enrolled range.
ScoreSet user_decidability_scores(const FeatureDataset& ds, const EvalSettings& s,
                                  std::size_t user);

/// Parallel all-pairs normalized Hamming distance (queries x references).
RowMatrix score_matrix(const std::vector<BitString>& queries,
                       const std::vector<BitString>& references);

/// The user's enrolled template scored against templates built from the
/// same enrolment frames under each of `keys` (range per the policy, under the
/// new key). ConfigError when a key repeats or equals the user's own key.
std::vector<double> revocability_scores(const FeatureDataset& ds, const EvalSettings& s,
                                        std::size_t user,
                                        const std::vector<std::uint64_t>& keys);

/// Pseudo-impostor scores for every subject with `n_keys` fresh keys each.
std::vector<double> pseudo_impostor_scores(const FeatureDataset& ds, const EvalSettings& s,
                                           std::size_t n_keys = 50);

struct UnlinkabilityResult {
  std::vector<double> bin_centers;
  std::vector<double> mated_density;
  std::vector<double> non_mated_density;
  std::vector<double> d_local;
  double d_sys = 0.0;
};

/// Histogram estimate of the local and global linkability measures over
/// `bins` shared bins. Needs at least 100 scores in each list.
UnlinkabilityResult unlinkability(const std::vector<double>& mated,
                                  const std::vector<double>& non_mated, std::size_t bins = 50);

/// Mated / non-mated scores from `n_keys` transformed databases. Database k
/// uses its own key (per subject under KeyPolicy::PerUser) and ranges per the
/// policy; every frame is encoded as a single-frame template. Mated: same subject and frame,
/// two databases. Non-mated: two subjects, same frame index, two databases.
std::pair<std::vector<double>, std::vector<double>> unlinkability_scores(
    const FeatureDataset& ds, const EvalSettings& s, std::size_t n_keys = 6);

struct EvalOptions {
  std::size_t revocability_keys = 50;
  std::size_t unlinkability_keys = 6;
  std::size_t unlinkability_bins = 50;
  bool decidability = true;  // per-user single-frame protocol
};

struct EvalReport {
  std::size_t n_subjects = 0, genuine_tests = 0, impostor_tests = 0;
  EerResult eer;
  std::vector<RocPoint> roc;
  Summary genuine, impostor;
  /// Per-user protocol scores pooled over users; empty when disabled.
  std::optional<Decidability> decidability;
  Summary decidability_genuine, decidability_impostor;
  Summary pseudo_impostor;
  Summary mated, non_mated;
  UnlinkabilityResult unlinkability;
};

struct EvalRun {
  ScoreSet scores;  // genuine/impostor of the verification protocol
  EvalReport report;
};

EvalRun run_evaluation(const FeatureDataset& ds, const EvalSettings& s, const EvalOptions& o = {});

}  // namespace neurolock
