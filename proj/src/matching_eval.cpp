#include "neurolock/matching_eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "neurolock/error.hpp"
#include "neurolock/rng.hpp"

namespace neurolock {

namespace {

void require_nonempty(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw ConfigError(std::string(what) + " score list is empty");
}

// Mean of the projected frames [first, first + count), gray-encoded.
BitString encode_frames(const SubjectFeatures& s, std::size_t first, std::size_t count,
                        const TransformParams& params, const QuantRange& range) {
  std::vector<double> mean(params.output_dim(), 0.0);
  for (std::size_t f = first; f < first + count; ++f) {
    const auto r = transform_frame(s.first[f], s.second[f], params);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += r[j];
  }
  for (double& m : mean) m /= static_cast<double>(count);
  return gray_encode(mean, range);
}

void append_projected(const SubjectFeatures& s, std::size_t frames, const TransformParams& params,
                      std::vector<std::vector<double>>& out) {
  if (frames > s.frame_count()) throw ConfigError("subject has fewer frames than F_e");
  for (std::size_t f = 0; f < frames; ++f)
    out.push_back(transform_frame(s.first[f], s.second[f], params));
}

std::vector<std::size_t> frame_counts(const FeatureDataset& ds) {
  std::vector<std::size_t> n;
  n.reserve(ds.subjects.size());
  for (const auto& s : ds.subjects) n.push_back(s.frame_count());
  return n;
}

}  // namespace

std::string_view to_string(QuantPolicy p) noexcept {
  return p == QuantPolicy::Enrollment ? "enrollment" : "population";
}

QuantPolicy parse_quant_policy(std::string_view name) {
  if (name == "enrollment") return QuantPolicy::Enrollment;
  if (name == "population") return QuantPolicy::Population;
  throw ConfigError("unknown quantization policy '" + std::string(name) + "'");
}

std::string_view to_string(KeyPolicy p) noexcept {
  return p == KeyPolicy::Shared ? "shared" : "per_user";
}

KeyPolicy parse_key_policy(std::string_view name) {
  if (name == "shared") return KeyPolicy::Shared;
  if (name == "per_user") return KeyPolicy::PerUser;
  throw ConfigError("unknown key policy '" + std::string(name) + "'");
}

QuantRange quant_range_for(const FeatureDataset& ds, const EvalSettings& s, std::size_t user,
                           const TransformParams& params) {
  std::vector<std::vector<double>> projected;
  if (s.quant_policy == QuantPolicy::Enrollment) {
    append_projected(ds.subjects.at(user), s.enroll_frames, params, projected);
  } else {
    projected.reserve(ds.subjects.size() * s.enroll_frames);
    for (const auto& subj : ds.subjects) append_projected(subj, s.enroll_frames, params, projected);
  }
  return range_from_vectors(projected);
}

double false_accept_rate(const std::vector<double>& impostor, double threshold) {
  require_nonempty(impostor, "impostor");
  const auto n = std::count_if(impostor.begin(), impostor.end(),
                               [&](double s) { return s <= threshold; });
  return static_cast<double>(n) / static_cast<double>(impostor.size());
}

double false_reject_rate(const std::vector<double>& genuine, double threshold) {
  require_nonempty(genuine, "genuine");
  const auto n = std::count_if(genuine.begin(), genuine.end(),
                               [&](double s) { return s > threshold; });
  return static_cast<double>(n) / static_cast<double>(genuine.size());
}

std::vector<RocPoint> roc_curve(const std::vector<double>& genuine,
                                const std::vector<double>& impostor) {
  require_nonempty(genuine, "genuine");
  require_nonempty(impostor, "impostor");
  std::vector<double> g = genuine, im = impostor;
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());
  std::vector<double> thresholds;
  thresholds.reserve(g.size() + im.size());
  std::merge(g.begin(), g.end(), im.begin(), im.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<RocPoint> out;
  out.reserve(thresholds.size());
  std::size_t gi = 0, ii = 0;
  const auto ng = static_cast<double>(g.size()), ni = static_cast<double>(im.size());
  for (double t : thresholds) {
    while (gi < g.size() && g[gi] <= t) ++gi;
    while (ii < im.size() && im[ii] <= t) ++ii;
    out.push_back({t, static_cast<double>(ii) / ni, static_cast<double>(g.size() - gi) / ng});
  }
  return out;
}

EerResult eer(const std::vector<double>& genuine, const std::vector<double>& impostor) {
  const auto roc = roc_curve(genuine, impostor);
  const RocPoint* best = &roc.front();
  for (const auto& p : roc)
    if (std::abs(p.far - p.frr) < std::abs(best->far - best->frr)) best = &p;
  return {(best->far + best->frr) / 2.0, best->threshold, best->far, best->frr};
}

Summary summarize(const std::vector<double>& v) {
  Summary s;
  s.count = v.size();
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(v.size()));
  return s;
}

Decidability decidability(const std::vector<double>& genuine,
                          const std::vector<double>& impostor) {
  if (genuine.size() < 2 || impostor.size() < 2)
    throw ConfigError("decidability needs at least two scores per list");
  const Summary g = summarize(genuine), i = summarize(impostor);
  const double pooled = std::sqrt((g.std * g.std + i.std * i.std) / 2.0);
  Decidability d;
  if (pooled > 0.0) d.d_prime = (g.mean - i.mean) / pooled;
  else if (g.mean != i.mean) d.d_prime = g.mean < i.mean ? -INFINITY : INFINITY;
  d.magnitude = std::abs(d.d_prime);
  return d;
}

ProtocolPlan protocol_tests(const std::vector<std::size_t>& frames_per_subject,
                            std::size_t enroll_frames, std::size_t test_frames) {
  if (enroll_frames < 1 || test_frames < 1) throw ConfigError("F_e and F_t must be >= 1");
  if (frames_per_subject.size() < 2) throw ConfigError("protocol needs at least two subjects");
  for (std::size_t n : frames_per_subject)
    if (n < enroll_frames + test_frames)
      throw ConfigError("subject has " + std::to_string(n) + " frames, protocol needs " +
                        std::to_string(enroll_frames + test_frames));
  ProtocolPlan plan;
  plan.enroll_frames = enroll_frames;
  const std::size_t subjects = frames_per_subject.size();
  for (std::size_t u = 0; u < subjects; ++u) {
    const std::size_t groups = (frames_per_subject[u] - enroll_frames) / test_frames;
    for (std::size_t g = 0; g < groups; ++g)
      plan.genuine.push_back({u, u, enroll_frames + g * test_frames, test_frames});
    for (std::size_t o = 0; o < subjects; ++o)
      if (o != u) plan.impostor.push_back({u, o, enroll_frames, test_frames});
  }
  return plan;
}

std::uint64_t user_key(const EvalSettings& s, std::size_t user) {
  return s.key_policy == KeyPolicy::Shared ? derive_seed(s.master_key, "key")
                                           : derive_seed(s.master_key, "key", user + 1);
}

TransformParams user_params(const EvalSettings& s, std::size_t user, std::size_t dim) {
  return derive_params(user_key(s, user), dim, s.delta, s.projection);
}

std::vector<CancellableTemplate> enroll_all(const FeatureDataset& ds, const EvalSettings& s) {
  std::vector<CancellableTemplate> out(ds.subjects.size());
  const auto n = static_cast<std::ptrdiff_t>(ds.subjects.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t uu = 0; uu < n; ++uu) {
    const auto u = static_cast<std::size_t>(uu);
    const auto& subj = ds.subjects[u];
    const auto params = user_params(s, u, ds.dim);
    out[u] = make_template(subj.first, subj.second, params, s.enroll_frames,
                           quant_range_for(ds, s, u, params), subj.subject_id);
  }
  return out;
}

ScoreSet protocol_scores(const FeatureDataset& ds, const EvalSettings& s) {
  const ProtocolPlan plan = protocol_tests(frame_counts(ds), s.enroll_frames, s.test_frames);
  const auto enrolled = enroll_all(ds, s);
  std::vector<TransformParams> params;
  params.reserve(ds.subjects.size());
  for (std::size_t u = 0; u < ds.subjects.size(); ++u) params.push_back(user_params(s, u, ds.dim));

  auto score = [&](const std::vector<Trial>& trials) {
    std::vector<double> out(trials.size());
    const auto n = static_cast<std::ptrdiff_t>(trials.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      const Trial& t = trials[static_cast<std::size_t>(k)];
      const BitString q = encode_frames(ds.subjects[t.query_subject], t.first_frame, t.frames,
                                        params[t.user], enrolled[t.user].meta.quant_range);
      out[static_cast<std::size_t>(k)] = normalized_hamming(q, enrolled[t.user].bits);
    }
    return out;
  };
  ScoreSet set;
  set.genuine = score(plan.genuine);
  set.impostor = score(plan.impostor);
  return set;
}

ScoreSet user_decidability_scores(const FeatureDataset& ds, const EvalSettings& s,
                                  std::size_t user) {
  if (user >= ds.subjects.size()) throw ConfigError("user index out of range");
  const TransformParams params = user_params(s, user, ds.dim);
  const auto& me = ds.subjects[user];
  const QuantRange range = quant_range_for(ds, s, user, params);

  auto encode_all = [&](const SubjectFeatures& subj) {
    std::vector<BitString> t(subj.frame_count());
    for (std::size_t f = 0; f < t.size(); ++f) t[f] = encode_frames(subj, f, 1, params, range);
    return t;
  };
  const auto mine = encode_all(me);
  std::vector<BitString> others;
  for (std::size_t o = 0; o < ds.subjects.size(); ++o) {
    if (o == user) continue;
    auto t = encode_all(ds.subjects[o]);
    others.insert(others.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
  }
  ScoreSet set;
  for (std::size_t a = 0; a < mine.size(); ++a)
    for (std::size_t b = a + 1; b < mine.size(); ++b)
      set.genuine.push_back(normalized_hamming(mine[a], mine[b]));
  const RowMatrix imp = score_matrix(mine, others);
  set.impostor.assign(imp.values().begin(), imp.values().end());
  return set;
}

RowMatrix score_matrix(const std::vector<BitString>& queries,
                       const std::vector<BitString>& references) {
  RowMatrix out(queries.size(), references.size());
  const auto nq = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t qq = 0; qq < nq; ++qq) {
    const auto q = static_cast<std::size_t>(qq);
    for (std::size_t r = 0; r < references.size(); ++r)
      out(q, r) = normalized_hamming(queries[q], references[r]);
  }
  return out;
}

std::vector<double> revocability_scores(const FeatureDataset& ds, const EvalSettings& s,
                                        std::size_t user,
                                        const std::vector<std::uint64_t>& keys) {
  const TransformParams original = user_params(s, user, ds.dim);
  std::set<std::uint64_t> seen;
  for (std::uint64_t k : keys) {
    if (k == original.user_key) throw ConfigError("revocation key list contains the original key");
    if (!seen.insert(k).second) throw ConfigError("revocation key list has duplicates");
  }
  const auto& subj = ds.subjects.at(user);
  const auto enrolled = make_template(subj.first, subj.second, original, s.enroll_frames,
                                      quant_range_for(ds, s, user, original));
  std::vector<double> out(keys.size());
  const auto n = static_cast<std::ptrdiff_t>(keys.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t kk = 0; kk < n; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    const auto params = derive_params(keys[k], original.dim, original.delta, s.projection);
    const auto renewed = make_template(subj.first, subj.second, params, s.enroll_frames,
                                       quant_range_for(ds, s, user, params));
    out[k] = normalized_hamming(enrolled.bits, renewed.bits);
  }
  return out;
}

std::vector<double> pseudo_impostor_scores(const FeatureDataset& ds, const EvalSettings& s,
                                           std::size_t n_keys) {
  std::vector<double> out;
  for (std::size_t u = 0; u < ds.subjects.size(); ++u) {
    const std::uint64_t own = user_key(s, u);
    std::vector<std::uint64_t> keys;
    for (std::size_t k = 0; keys.size() < n_keys; ++k) {
      const std::uint64_t key = derive_seed(s.master_key, "revoke", u, k);
      if (key != own) keys.push_back(key);
    }
    const auto scores = revocability_scores(ds, s, u, keys);
    out.insert(out.end(), scores.begin(), scores.end());
  }
  return out;
}

UnlinkabilityResult unlinkability(const std::vector<double>& mated,
                                  const std::vector<double>& non_mated, std::size_t bins) {
  if (mated.size() < 100 || non_mated.size() < 100)
    throw ConfigError("unlinkability needs at least 100 mated and 100 non-mated scores");
  if (bins < 1) throw ConfigError("unlinkability needs at least one bin");
  UnlinkabilityResult res;
  const double width = 1.0 / static_cast<double>(bins);
  auto histogram = [&](const std::vector<double>& v) {
    std::vector<double> h(bins, 0.0);
    for (double s : v) {
      if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("unlinkability scores must lie in [0, 1]");
      const auto b = std::min(bins - 1, static_cast<std::size_t>(s / width));
      h[b] += 1.0;
    }
    for (double& x : h) x /= static_cast<double>(v.size()) * width;
    return h;
  };
  res.mated_density = histogram(mated);
  res.non_mated_density = histogram(non_mated);
  res.bin_centers.resize(bins);
  res.d_local.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    res.bin_centers[b] = (static_cast<double>(b) + 0.5) * width;
    const double pm = res.mated_density[b], pn = res.non_mated_density[b];
    double d = 0.0;
    if (pn == 0.0) d = pm > 0.0 ? 1.0 : 0.0;
    else {
      const double lr = pm / pn;
      d = std::max(0.0, 2.0 * lr / (1.0 + lr) - 1.0);
    }
    res.d_local[b] = d;
    res.d_sys += d * pm * width;
  }
  res.d_sys = std::clamp(res.d_sys, 0.0, 1.0);
  return res;
}

std::pair<std::vector<double>, std::vector<double>> unlinkability_scores(
    const FeatureDataset& ds, const EvalSettings& s, std::size_t n_keys) {
  if (n_keys < 2) throw ConfigError("unlinkability needs at least two keys");
  const std::size_t subjects = ds.subjects.size();
  std::size_t frames = SIZE_MAX;
  for (const auto& subj : ds.subjects) frames = std::min(frames, subj.frame_count());
  if (subjects < 2 || frames < s.enroll_frames) throw ConfigError("dataset too small for unlinkability");

  // db[k][u][f]: frame f of subject u in database k.
  std::vector<std::vector<std::vector<BitString>>> db(
      n_keys, std::vector<std::vector<BitString>>(subjects));
  const auto jobs = static_cast<std::ptrdiff_t>(n_keys * subjects);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t jj = 0; jj < jobs; ++jj) {
    const std::size_t k = static_cast<std::size_t>(jj) / subjects;
    const std::size_t u = static_cast<std::size_t>(jj) % subjects;
    const std::uint64_t key = s.key_policy == KeyPolicy::Shared
                                  ? derive_seed(s.master_key, "database", k)
                                  : derive_seed(s.master_key, "database", k, u + 1);
    const auto params = derive_params(key, ds.dim, s.delta, s.projection);
    const auto& subj = ds.subjects[u];
    const QuantRange range = quant_range_for(ds, s, u, params);
    auto& out = db[k][u];
    out.resize(frames);
    for (std::size_t f = 0; f < frames; ++f) out[f] = encode_frames(subj, f, 1, params, range);
  }

  std::vector<double> mated, non_mated;
  for (std::size_t u = 0; u < subjects; ++u)
    for (std::size_t i = 0; i < n_keys; ++i)
      for (std::size_t j = i + 1; j < n_keys; ++j)
        for (std::size_t f = 0; f < frames; ++f)
          mated.push_back(normalized_hamming(db[i][u][f], db[j][u][f]));
  for (std::size_t a = 0; a < subjects; ++a)
    for (std::size_t b = a + 1; b < subjects; ++b)
      for (std::size_t i = 0; i < n_keys; ++i)
        for (std::size_t j = 0; j < n_keys; ++j) {
          if (i == j) continue;
          for (std::size_t f = 0; f < frames; ++f)
            non_mated.push_back(normalized_hamming(db[i][a][f], db[j][b][f]));
        }
  return {std::move(mated), std::move(non_mated)};
}

EvalRun run_evaluation(const FeatureDataset& ds, const EvalSettings& s, const EvalOptions& o) {
  EvalRun run;
  EvalReport& r = run.report;
  run.scores = protocol_scores(ds, s);
  r.n_subjects = ds.subjects.size();
  r.genuine_tests = run.scores.genuine.size();
  r.impostor_tests = run.scores.impostor.size();
  r.eer = eer(run.scores.genuine, run.scores.impostor);
  r.roc = roc_curve(run.scores.genuine, run.scores.impostor);
  r.genuine = summarize(run.scores.genuine);
  r.impostor = summarize(run.scores.impostor);

  if (o.decidability) {
    std::vector<double> g, im;
    for (std::size_t u = 0; u < ds.subjects.size(); ++u) {
      auto set = user_decidability_scores(ds, s, u);
      g.insert(g.end(), set.genuine.begin(), set.genuine.end());
      im.insert(im.end(), set.impostor.begin(), set.impostor.end());
    }
    r.decidability = decidability(g, im);
    r.decidability_genuine = summarize(g);
    r.decidability_impostor = summarize(im);
  }
  if (o.revocability_keys > 0) {
    run.scores.pseudo_impostor = pseudo_impostor_scores(ds, s, o.revocability_keys);
    r.pseudo_impostor = summarize(run.scores.pseudo_impostor);
  }
  if (o.unlinkability_keys > 0) {
    auto [mated, non_mated] = unlinkability_scores(ds, s, o.unlinkability_keys);
    r.unlinkability = unlinkability(mated, non_mated, o.unlinkability_bins);
    r.mated = summarize(mated);
    r.non_mated = summarize(non_mated);
    run.scores.mated = std::move(mated);
    run.scores.non_mated = std::move(non_mated);
  }
  return run;
}

}  // namespace neurolock
