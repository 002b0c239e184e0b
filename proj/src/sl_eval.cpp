#include "neurolock/sl_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "neurolock/error.hpp"
#include "neurolock/matching_eval.hpp"
#include "neurolock/rng.hpp"

namespace neurolock {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Per-subject shuffled split: the first round(split * count) samples of each
// subject train.
void stratified_split(const SampleSet& data, const std::vector<std::size_t>& subjects,
                      double split, Rng& rng, std::vector<std::size_t>& train,
                      std::vector<std::size_t>& test) {
  std::vector<std::vector<std::size_t>> by_subject(data.n_subjects);
  for (std::size_t i = 0; i < data.x.size(); ++i) by_subject[data.subject[i]].push_back(i);
  for (std::size_t s : subjects) {
    auto idx = by_subject[s];
    const auto perm = rng.permutation(idx.size());
    const auto n_train = static_cast<std::size_t>(std::llround(split * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < idx.size(); ++k)
      (k < n_train ? train : test).push_back(idx[perm[k]]);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
}

void check_data(const SampleSet& data, double split) {
  if (data.n_subjects < 2) throw ConfigError("evaluation needs at least two subjects");
  if (data.x.size() != data.subject.size()) throw ShapeError("sample and subject counts differ");
  for (std::size_t s : data.subject)
    if (s >= data.n_subjects) throw ShapeError("subject index out of range");
  if (!(split > 0.0 && split < 1.0)) throw ConfigError("split must lie in (0, 1)");
}

struct ModelRun {
  std::vector<std::size_t> train;
  std::vector<std::size_t> negatives;
  Confusion confusion;
  std::vector<double> genuine, impostor;  // distances: -score
};

ModelRun train_and_test(const SampleSet& data, std::size_t user,
                        const std::vector<std::size_t>& train,
                        const std::vector<std::size_t>& positives,
                        const std::vector<std::size_t>& negatives) {
  LabeledSet ls;
  for (std::size_t i : train) {
    ls.x.push_back(data.x[i]);
    ls.label.push_back(data.subject[i] == user ? 1 : 0);
  }
  const LdaModel model = lda_train(ls);
  ModelRun run;
  run.train = train;
  run.negatives = negatives;
  for (std::size_t i : positives) {
    const double s = model.score(data.x[i]);
    (s > 0.0 ? run.confusion.tp : run.confusion.fn)++;
    run.genuine.push_back(-s);
  }
  for (std::size_t i : negatives) {
    const double s = model.score(data.x[i]);
    (s > 0.0 ? run.confusion.fp : run.confusion.tn)++;
    run.impostor.push_back(-s);
  }
  return run;
}

SlMetrics aggregate(std::vector<ModelRun>& runs) {
  SlMetrics m;
  std::vector<double> genuine, impostor;
  for (auto& r : runs) {
    m.confusion.tp += r.confusion.tp;
    m.confusion.fn += r.confusion.fn;
    m.confusion.fp += r.confusion.fp;
    m.confusion.tn += r.confusion.tn;
    genuine.insert(genuine.end(), r.genuine.begin(), r.genuine.end());
    impostor.insert(impostor.end(), r.impostor.begin(), r.impostor.end());
    m.training_indices.push_back(std::move(r.train));
    m.negative_test_indices.push_back(std::move(r.negatives));
  }
  m.accuracy = m.confusion.accuracy();
  m.far = m.confusion.far();
  m.frr = m.confusion.frr();
  if (!genuine.empty() && !impostor.empty()) m.classifier_eer = eer(genuine, impostor).eer;
  return m;
}

}  // namespace

double LdaModel::score(std::span<const double> x) const {
  if (static_cast<Eigen::Index>(x.size()) != w.size()) throw ShapeError("LDA input has the wrong length");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w(static_cast<Eigen::Index>(i)) * x[i];
  return s - threshold;
}

LdaModel lda_train(const LabeledSet& train, std::optional<double> reg) {
  if (train.x.size() != train.label.size()) throw ShapeError("LDA sample and label counts differ");
  if (train.x.empty()) throw ConfigError("LDA needs training data");
  const auto dim = static_cast<Eigen::Index>(train.x.front().size());
  Eigen::VectorXd mu[2] = {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim)};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < train.x.size(); ++i) {
    if (static_cast<Eigen::Index>(train.x[i].size()) != dim) throw ShapeError("LDA samples differ in length");
    const int c = train.label[i] != 0 ? 1 : 0;
    mu[c] += Eigen::Map<const Eigen::VectorXd>(train.x[i].data(), dim);
    ++count[c];
  }
  if (count[0] == 0 || count[1] == 0) throw ConfigError("LDA needs samples of both classes");
  mu[0] /= static_cast<double>(count[0]);
  mu[1] /= static_cast<double>(count[1]);

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < train.x.size(); ++i) {
    const int c = train.label[i] != 0 ? 1 : 0;
    const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(train.x[i].data(), dim) - mu[c];
    scatter.noalias() += d * d.transpose();
  }
  scatter /= static_cast<double>(train.x.size());
  const double lambda = reg ? *reg : 1e-6 * scatter.trace() / static_cast<double>(dim);
  if (lambda < 0.0) throw ConfigError("LDA regularization must be >= 0");
  scatter.diagonal().array() += lambda;

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
  const double top = eig.eigenvalues().maxCoeff();
  if (!(top > 0.0) || eig.eigenvalues().minCoeff() <= 1e-12 * top)
    throw SingularityError("pooled within-class covariance is singular");

  LdaModel m;
  m.w = scatter.ldlt().solve(mu[1] - mu[0]);
  const double prior = std::log(static_cast<double>(count[1]) / static_cast<double>(count[0]));
  m.threshold = 0.5 * m.w.dot(mu[0] + mu[1]) - prior;
  return m;
}

double Confusion::accuracy() const { return ratio(tp + tn, total()); }
double Confusion::far() const { return ratio(fp, fp + tn); }
double Confusion::frr() const { return ratio(fn, tp + fn); }

SlMetrics eval_classification_style(const SampleSet& data, double split, std::uint64_t seed) {
  check_data(data, split);
  std::vector<std::size_t> all(data.n_subjects);
  for (std::size_t s = 0; s < all.size(); ++s) all[s] = s;
  std::vector<ModelRun> runs(data.n_subjects);
  const auto n = static_cast<std::ptrdiff_t>(data.n_subjects);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t uu = 0; uu < n; ++uu) {
    const auto u = static_cast<std::size_t>(uu);
    Rng rng(seed, "sl.classification", u);
    std::vector<std::size_t> train, test, pos, neg;
    stratified_split(data, all, split, rng, train, test);
    for (std::size_t i : test) (data.subject[i] == u ? pos : neg).push_back(i);
    runs[u] = train_and_test(data, u, train, pos, neg);
  }
  return aggregate(runs);
}

SlMetrics eval_authentication_style(const SampleSet& data, double split, std::size_t n_users,
                                    std::uint64_t seed) {
  check_data(data, split);
  if (n_users < 2 || n_users >= data.n_subjects)
    throw ConfigError("authentication evaluation needs 2 <= n_users < subjects");
  Rng pick(seed, "sl.user_set");
  const auto perm = pick.permutation(data.n_subjects);
  std::vector<std::size_t> users(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_users));
  std::sort(users.begin(), users.end());
  const std::set<std::size_t> user_set(users.begin(), users.end());
  std::vector<std::size_t> intruders;
  for (std::size_t i = 0; i < data.x.size(); ++i)
    if (!user_set.count(data.subject[i])) intruders.push_back(i);

  std::vector<ModelRun> runs(users.size());
  const auto n = static_cast<std::ptrdiff_t>(users.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t kk = 0; kk < n; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    const std::size_t u = users[k];
    Rng rng(seed, "sl.authentication", u);
    std::vector<std::size_t> train, test, pos;
    stratified_split(data, users, split, rng, train, test);
    for (std::size_t i : test)
      if (data.subject[i] == u) pos.push_back(i);
    runs[k] = train_and_test(data, u, train, pos, intruders);
  }
  SlMetrics m = aggregate(runs);
  m.intruder_indices = std::move(intruders);
  return m;
}

bool training_leaks_intruders(const SampleSet& data, const SlMetrics& m) {
  for (std::size_t k = 0; k < m.training_indices.size(); ++k) {
    std::set<std::size_t> negative_subjects;
    for (std::size_t i : m.negative_test_indices[k]) negative_subjects.insert(data.subject[i]);
    for (std::size_t i : m.training_indices[k])
      if (negative_subjects.count(data.subject[i])) return true;
  }
  return false;
}

std::vector<PitfallConfig> default_pitfall_configs(std::size_t n_subjects) {
  auto scaled = [&](double share) {
    const auto n = static_cast<std::size_t>(std::llround(share * static_cast<double>(n_subjects)));
    return std::clamp<std::size_t>(n, 2, n_subjects - 1);
  };
  return {{"classification", 0.8, 0},
          {"authentication", 0.8, scaled(80.0 / 109.0)},
          {"authentication", 1.0 / 3.0, scaled(80.0 / 109.0)},
          {"authentication", 1.0 / 3.0, scaled(30.0 / 109.0)}};
}

std::vector<PitfallRow> pitfall_report(const SampleSet& data,
                                       const std::vector<PitfallConfig>& configs,
                                       std::uint64_t seed) {
  std::vector<PitfallRow> rows;
  for (const auto& c : configs) {
    PitfallRow row;
    row.method = "LDA";
    char label[96];
    SlMetrics m;
    if (c.evaluation == "classification") {
      m = eval_classification_style(data, c.split, seed);
      std::snprintf(label, sizeof label, "classification (%.0f%%)", 100.0 * c.split);
    } else if (c.evaluation == "authentication") {
      m = eval_authentication_style(data, c.split, c.n_users, seed);
      std::snprintf(label, sizeof label, "authentication (%.0f%%, %zu users)", 100.0 * c.split,
                    c.n_users);
    } else {
      throw ConfigError("unknown evaluation procedure '" + c.evaluation + "'");
    }
    row.evaluation = label;
    row.accuracy = m.accuracy;
    row.far = m.far;
    row.frr = m.frr;
    row.classifier_eer = m.classifier_eer;
    rows.push_back(row);
  }
  return rows;
}

SampleSet synthetic_clusters(std::size_t n_subjects, std::size_t samples_per_subject,
                             std::size_t dim, double separation, std::uint64_t seed) {
  if (n_subjects < 2 || samples_per_subject < 1 || dim < 1)
    throw ConfigError("synthetic clusters need >= 2 subjects, >= 1 sample and >= 1 dimension");
  SampleSet set;
  set.n_subjects = n_subjects;
  for (std::size_t s = 0; s < n_subjects; ++s) {
    Rng rng(seed, "sl.clusters", s);
    std::vector<double> mean(dim);
    for (double& m : mean) m = separation * rng.normal();
    for (std::size_t k = 0; k < samples_per_subject; ++k) {
      std::vector<double> x(dim);
      for (std::size_t j = 0; j < dim; ++j) x[j] = mean[j] + rng.normal();
      set.x.push_back(std::move(x));
      set.subject.push_back(s);
    }
  }
  return set;
}

}  // namespace neurolock
