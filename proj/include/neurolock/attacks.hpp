#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "neurolock/matching_eval.hpp"
#include "neurolock/transform.hpp"

namespace neurolock {

using Objective = std::function<double(const std::vector<double>&)>;

struct NelderMeadOptions {
  std::size_t budget = 1000;  // objective evaluations, including the initial simplex
  double tol = -INFINITY;     // stop as soon as f <= tol
  double min_diameter = 1e-10;
  /// Initial simplex edge per coordinate. Empty: 5% of |x0[i]|, or 0.00025
  /// when x0[i] is zero.
  std::vector<double> initial_step;
};

enum class NelderMeadStop { Tolerance, Converged, Budget };

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  std::size_t evals = 0;
  NelderMeadStop stop = NelderMeadStop::Budget;
};

/// Downhill simplex with reflection 1, expansion 2, contraction 0.5 and
/// shrink 0.5. Throws ObjectiveError when the objective returns NaN.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadOptions& opts = {});

enum class AttackCase {
  FeatureSpace,   // Case I: search both feature vectors
  TemplateSpace,  // Case II: search the pre-encoding projected vector
};

std::string_view to_string(AttackCase c) noexcept;
AttackCase parse_attack_case(std::string_view name);

struct AttackConfig {
  AttackCase attack_case = AttackCase::FeatureSpace;
  double threshold = 0.389;
  std::size_t max_attempts = 20000;
  std::size_t restarts = 0;  // maximum simplex starts, 0 = until the budget is spent
  std::uint64_t seed = 1;
  /// Initial simplex edge as a fraction of each search-box side.
  double step_fraction = 0.1;
};

/// The attacked system: one enrolled template behind a matcher that only
/// reports scores. Every query is counted.
class ScoreOracle {
 public:
  ScoreOracle(CancellableTemplate enrolled, TransformParams params)
      : enrolled_(std::move(enrolled)), params_(std::move(params)) {}

  /// Case I query: both feature vectors, transformed with the user's params.
  double score_features(std::span<const double> v1, std::span<const double> v2);
  /// Case II query: a pre-encoding vector, gray-encoded with the template range.
  double score_projection(std::span<const double> r);

  std::size_t calls() const noexcept { return trace_.size(); }
  const std::vector<double>& trace() const noexcept { return trace_; }
  const CancellableTemplate& enrolled() const noexcept { return enrolled_; }
  const TransformParams& params() const noexcept { return params_; }

 private:
  double record(double s) {
    trace_.push_back(s);
    return s;
  }

  CancellableTemplate enrolled_;
  TransformParams params_;
  std::vector<double> trace_;
};

struct SearchBox {
  std::vector<double> lo, hi;
  std::size_t size() const noexcept { return lo.size(); }
};

/// Per-coordinate [min, max] of the given vectors.
SearchBox box_from_vectors(const std::vector<std::vector<double>>& vectors);

struct HillClimbOutcome {
  std::size_t user = 0;
  bool success = false;
  std::size_t attempts = 0;  // oracle calls until success, or all calls on failure
  std::size_t starts = 0;
  double best_score = 1.0;
  /// Case I: v1 followed by v2. Case II: the pre-encoding vector.
  std::vector<double> solution;
  BitString solution_bits;  // Case II only
  std::vector<double> trace;
};

/// Nelder-Mead restarts from seeded uniform points of `box` until a query
/// scores <= threshold or the attempt budget is spent. Candidates are clamped
/// into the box before they are submitted.
HillClimbOutcome hill_climb_attack(ScoreOracle& oracle, const SearchBox& box,
                                   const AttackConfig& cfg, std::size_t user = 0);

struct ArmSystem {
  Eigen::MatrixXd a;  // equations x unknowns
  Eigen::VectorXd b;
  std::vector<std::pair<std::size_t, std::size_t>> unknowns;  // (index into v1, index into v2)
};

/// One equation per projected coordinate of every template; unknowns are
/// the products v1[a] * v2[b] the permutations select.
ArmSystem assemble_arm_system(const std::vector<std::vector<double>>& r_hat,
                              const std::vector<TransformParams>& params);

struct ArmResult {
  std::vector<double> v1, v2;
  std::vector<double> monomials;  // minimum-norm solution, in ArmSystem::unknowns order
  std::size_t equations = 0, unknowns = 0, rank = 0;
  double residual = 0.0;          // ||A x - b||
  std::optional<double> similarity;
};

/// Decodes each template with its public range, solves the monomial system
/// in the minimum-norm least-squares sense and factors the populated product
/// matrix by its best rank-1 approximation.
ArmResult arm_attack(const std::vector<CancellableTemplate>& templates,
                     const std::vector<TransformParams>& params,
                     const std::optional<std::vector<double>>& truth = std::nullopt);

/// Same, from already decoded real vectors.
ArmResult arm_attack_real(const std::vector<std::vector<double>>& r_hat,
                          const std::vector<TransformParams>& params,
                          const std::optional<std::vector<double>>& truth = std::nullopt);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Cosine after centring and scaling each coordinate by reference
/// statistics (mean, population std); coordinates with zero spread only
/// get centred.
double standardized_similarity(std::span<const double> a, std::span<const double> b,
                               std::span<const double> mean, std::span<const double> std);

struct SecondAttackResult {
  std::size_t tests = 0;
  std::size_t successes = 0;
  Summary scores;
};

/// Revokes `user`'s template `n_keys` times (fresh keys) and submits the
/// pre-obtained solution against each renewed template: Case I solutions are
/// transformed with the new key, Case II bit strings are matched as they are.
SecondAttackResult second_attack(const FeatureDataset& ds, const EvalSettings& s,
                                 std::size_t user, AttackCase attack_case,
                                 const HillClimbOutcome& solution, double threshold,
                                 std::size_t n_keys = 200);

/// log2 of the brute-force search space for two protected vectors.
std::uint64_t brute_force_space(std::uint64_t dim, std::uint64_t bits_per_dim);

struct UserAttack {
  HillClimbOutcome outcome;
  std::optional<double> similarity;  // Case I successes only
  std::optional<SecondAttackResult> second;
};

struct AttackReport {
  AttackCase attack_case = AttackCase::FeatureSpace;
  double threshold = 0.0;
  std::size_t users = 0, successes = 0;
  double success_rate = 0.0;
  double mean_attempts = 0.0;  // over successes
  Summary similarity;
  Summary second_scores;
  std::size_t second_tests = 0, second_successes = 0;
  double sar = 0.0;
  std::vector<UserAttack> per_user;
};

/// Hill-climbs every user (box from the other subjects' frames in Case I, the
/// template range in Case II), then runs the second attack on every success.
AttackReport attack_campaign(const FeatureDataset& ds, const EvalSettings& s,
                             const AttackConfig& cfg, std::size_t second_keys = 200);

}  // namespace neurolock
