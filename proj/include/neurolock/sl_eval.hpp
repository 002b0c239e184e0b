#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace neurolock {

/// Samples of several subjects; `subject[i]` is the owner of `x[i]`.
struct SampleSet {
  std::vector<std::vector<double>> x;
  std::vector<std::size_t> subject;
  std::size_t n_subjects = 0;
};

/// Two-class training data (1 = user, 0 = other).
struct LabeledSet {
  std::vector<std::vector<double>> x;
  std::vector<int> label;
};

struct LdaModel {
  Eigen::VectorXd w;
  double threshold = 0.0;

  /// w.x - threshold; positive means class 1.
  double score(std::span<const double> x) const;
  bool predict(std::span<const double> x) const { return score(x) > 0.0; }
};

/// Closed-form LDA: w = S^-1 (mu1 - mu0) with S the pooled within-class
/// covariance (divided by the sample count) plus reg * I; the threshold is
/// the midpoint of the projected class means minus log(p1 / p0). Default
/// reg is 1e-6 * trace(S) / dim. SingularityError when S + reg * I is not
/// positive definite.
LdaModel lda_train(const LabeledSet& train, std::optional<double> reg = std::nullopt);

struct Confusion {
  std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
  std::size_t total() const noexcept { return tp + fn + fp + tn; }
  double accuracy() const;
  double far() const;  // fp / (fp + tn)
  double frr() const;  // fn / (tp + fn)
};

struct SlMetrics {
  Confusion confusion;
  double accuracy = 0.0, far = 0.0, frr = 0.0;
  /// EER of the pooled classifier outputs (a property of the classifier,
  /// not of an authentication system).
  double classifier_eer = 0.0;
  /// Per trained model: sample indices of its training set.
  std::vector<std::vector<std::size_t>> training_indices;
  /// Per trained model: sample indices it was tested on as negatives.
  std::vector<std::vector<std::size_t>> negative_test_indices;
  /// Held-out intruder samples (empty for the classification procedure).
  std::vector<std::size_t> intruder_indices;
};

/// One-vs-rest model per subject on a per-subject stratified random split
/// of all data; every model is tested on the whole test part.
SlMetrics eval_classification_style(const SampleSet& data, double split, std::uint64_t seed);

/// Subjects are split into `n_users` users and held-out intruders first;
/// models see user-set data only and are tested on their own held-out
/// positives plus every intruder sample.
SlMetrics eval_authentication_style(const SampleSet& data, double split, std::size_t n_users,
                                    std::uint64_t seed);

/// True when some training set shares a subject with that model's negative
/// test samples (intruder data leaked into training).
bool training_leaks_intruders(const SampleSet& data, const SlMetrics& m);

struct PitfallConfig {
  std::string evaluation;  // "classification" or "authentication"
  double split = 0.8;
  std::size_t n_users = 0;  // authentication only
};

struct PitfallRow {
  std::string method;
  std::string evaluation;
  double accuracy = 0.0, far = 0.0, frr = 0.0, classifier_eer = 0.0;
};

std::vector<PitfallRow> pitfall_report(const SampleSet& data,
                                       const std::vector<PitfallConfig>& configs,
                                       std::uint64_t seed);

/// Table configurations scaled to `n_subjects` (user sets of 80/109 and
/// 30/109 of the subjects).
std::vector<PitfallConfig> default_pitfall_configs(std::size_t n_subjects);

/// Gaussian clusters: subject means ~ N(0, separation^2 I), samples ~ N(mean, I).
SampleSet synthetic_clusters(std::size_t n_subjects, std::size_t samples_per_subject,
                             std::size_t dim, double separation, std::uint64_t seed);

}  // namespace neurolock
