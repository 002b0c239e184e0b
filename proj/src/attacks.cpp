#include "neurolock/attacks.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "neurolock/error.hpp"
#include "neurolock/rng.hpp"

namespace neurolock {

namespace {

struct Vertex {
  std::vector<double> x;
  double f;
};

// Evaluation bookkeeping shared by every step of one simplex run.
class Evaluator {
 public:
  Evaluator(const Objective& f, const NelderMeadOptions& o) : f_(f), o_(o) {}

  // False when the budget is spent or the tolerance was already reached.
  bool can_eval() const { return !done() && evals_ < o_.budget; }
  bool done() const { return hit_tol_; }

  double operator()(const std::vector<double>& x) {
    const double v = f_(x);
    ++evals_;
    if (std::isnan(v)) throw ObjectiveError("objective returned NaN");
    if (v < best_.f || best_.x.empty()) best_ = {x, v};
    if (v <= o_.tol) hit_tol_ = true;
    return v;
  }

  std::size_t evals() const { return evals_; }
  const Vertex& best() const { return best_; }

 private:
  const Objective& f_;
  const NelderMeadOptions& o_;
  std::size_t evals_ = 0;
  bool hit_tol_ = false;
  Vertex best_{{}, INFINITY};
};

std::vector<double> affine(const std::vector<double>& base, const std::vector<double>& toward,
                           double t) {
  std::vector<double> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + t * (toward[i] - base[i]);
  return out;
}

std::vector<double> clamp_to(const std::vector<double>& x, const SearchBox& box) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x[i], box.lo[i], box.hi[i]);
  return out;
}

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadOptions& opts) {
  const std::size_t n = x0.size();
  if (n == 0) throw ConfigError("nelder_mead: empty starting point");
  if (opts.budget < 1) throw ConfigError("nelder_mead: budget must be >= 1");
  if (!opts.initial_step.empty() && opts.initial_step.size() != n)
    throw ShapeError("nelder_mead: initial_step has the wrong length");

  Evaluator eval(f, opts);
  auto finish = [&](NelderMeadStop stop) {
    NelderMeadResult r;
    r.x = eval.best().x;
    r.f = eval.best().f;
    r.evals = eval.evals();
    r.stop = eval.done() ? NelderMeadStop::Tolerance : stop;
    return r;
  };

  std::vector<Vertex> simplex;
  simplex.reserve(n + 1);
  simplex.push_back({x0, eval(x0)});
  for (std::size_t i = 0; i < n; ++i) {
    if (!eval.can_eval()) return finish(NelderMeadStop::Budget);
    std::vector<double> x = x0;
    const double step = opts.initial_step.empty()
                            ? (x0[i] != 0.0 ? 0.05 * std::abs(x0[i]) : 0.00025)
                            : opts.initial_step[i];
    x[i] += step;
    simplex.push_back({x, eval(x)});
  }

  while (true) {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    if (eval.done()) return finish(NelderMeadStop::Tolerance);
    double diameter = 0.0;
    for (std::size_t v = 1; v <= n; ++v) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = simplex[v].x[i] - simplex[0].x[i];
        d2 += d * d;
      }
      diameter = std::max(diameter, std::sqrt(d2));
    }
    if (diameter < opts.min_diameter) return finish(NelderMeadStop::Converged);

    std::vector<double> centroid(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v].x[i];
    for (double& c : centroid) c /= static_cast<double>(n);

    Vertex& worst = simplex[n];
    if (!eval.can_eval()) return finish(NelderMeadStop::Budget);
    const auto xr = affine(centroid, worst.x, -1.0);
    const double fr = eval(xr);

    if (fr < simplex[0].f) {
      if (!eval.can_eval()) {
        worst = {xr, fr};
        return finish(NelderMeadStop::Budget);
      }
      const auto xe = affine(centroid, worst.x, -2.0);
      const double fe = eval(xe);
      worst = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
      continue;
    }
    if (fr < simplex[n - 1].f) {
      worst = {xr, fr};
      continue;
    }
    if (!eval.can_eval()) return finish(NelderMeadStop::Budget);
    if (fr < worst.f) {
      const auto xc = affine(centroid, xr, 0.5);
      const double fc = eval(xc);
      if (fc <= fr) {
        worst = {xc, fc};
        continue;
      }
    } else {
      const auto xcc = affine(centroid, worst.x, 0.5);
      const double fcc = eval(xcc);
      if (fcc < worst.f) {
        worst = {xcc, fcc};
        continue;
      }
    }
    for (std::size_t v = 1; v <= n; ++v) {
      if (!eval.can_eval()) return finish(NelderMeadStop::Budget);
      simplex[v].x = affine(simplex[0].x, simplex[v].x, 0.5);
      simplex[v].f = eval(simplex[v].x);
    }
  }
}

std::string_view to_string(AttackCase c) noexcept {
  return c == AttackCase::FeatureSpace ? "feature_space" : "template_space";
}

AttackCase parse_attack_case(std::string_view name) {
  if (name == "feature_space" || name == "I") return AttackCase::FeatureSpace;
  if (name == "template_space" || name == "II") return AttackCase::TemplateSpace;
  throw ConfigError("unknown attack case '" + std::string(name) + "'");
}

double ScoreOracle::score_features(std::span<const double> v1, std::span<const double> v2) {
  const auto r = transform_frame(v1, v2, params_);
  return record(normalized_hamming(gray_encode(r, enrolled_.meta.quant_range), enrolled_.bits));
}

double ScoreOracle::score_projection(std::span<const double> r) {
  return record(normalized_hamming(gray_encode(r, enrolled_.meta.quant_range), enrolled_.bits));
}

SearchBox box_from_vectors(const std::vector<std::vector<double>>& vectors) {
  if (vectors.empty()) throw ConfigError("search box needs at least one vector");
  SearchBox box{vectors.front(), vectors.front()};
  for (const auto& v : vectors) {
    if (v.size() != box.size()) throw ShapeError("search box vectors differ in length");
    for (std::size_t i = 0; i < v.size(); ++i) {
      box.lo[i] = std::min(box.lo[i], v[i]);
      box.hi[i] = std::max(box.hi[i], v[i]);
    }
  }
  return box;
}

HillClimbOutcome hill_climb_attack(ScoreOracle& oracle, const SearchBox& box,
                                   const AttackConfig& cfg, std::size_t user) {
  if (cfg.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0))
    throw ConfigError("attack threshold must lie in [0, 1]");
  const std::size_t dim = oracle.params().dim;
  const std::size_t n = cfg.attack_case == AttackCase::FeatureSpace ? 2 * dim
                                                                    : oracle.params().output_dim();
  if (box.size() != n || box.hi.size() != n)
    throw ShapeError("search box has " + std::to_string(box.size()) + " coordinates, expected " +
                     std::to_string(n));

  const Objective objective = [&](const std::vector<double>& x) {
    const auto q = clamp_to(x, box);
    if (cfg.attack_case == AttackCase::FeatureSpace)
      return oracle.score_features(std::span(q).first(dim), std::span(q).subspan(dim));
    return oracle.score_projection(q);
  };

  HillClimbOutcome out;
  out.user = user;
  const std::size_t start_calls = oracle.calls();
  std::vector<double> step(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = box.hi[i] - box.lo[i];
    step[i] = w > 0.0 ? cfg.step_fraction * w : 0.00025;
  }
  while (oracle.calls() - start_calls < cfg.max_attempts &&
         (cfg.restarts == 0 || out.starts < cfg.restarts)) {
    Rng rng(cfg.seed, "hill_climb", user, static_cast<std::uint64_t>(cfg.attack_case), out.starts);
    std::vector<double> x0(n);
    for (std::size_t i = 0; i < n; ++i) x0[i] = rng.uniform(box.lo[i], box.hi[i]);
    NelderMeadOptions opts;
    opts.budget = cfg.max_attempts - (oracle.calls() - start_calls);
    opts.tol = cfg.threshold;
    opts.initial_step = step;
    const auto r = nelder_mead(objective, x0, opts);
    ++out.starts;
    if (r.f < out.best_score || out.solution.empty()) {
      out.best_score = r.f;
      out.solution = clamp_to(r.x, box);
    }
    if (r.f <= cfg.threshold) {
      out.success = true;
      break;
    }
  }
  out.attempts = oracle.calls() - start_calls;
  out.trace.assign(oracle.trace().begin() + static_cast<std::ptrdiff_t>(start_calls),
                   oracle.trace().end());
  if (cfg.attack_case == AttackCase::TemplateSpace)
    out.solution_bits = gray_encode(out.solution, oracle.enrolled().meta.quant_range);
  return out;
}

ArmSystem assemble_arm_system(const std::vector<std::vector<double>>& r_hat,
                              const std::vector<TransformParams>& params) {
  if (r_hat.size() != params.size() || params.empty())
    throw ShapeError("ARM needs one decoded vector per parameter set");
  const std::size_t dim = params.front().dim;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
  std::vector<std::pair<std::size_t, std::size_t>> unknowns;
  std::size_t equations = 0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    const auto& p = params[t];
    if (p.dim != dim || p.permutation.size() != dim || p.projection.rows() != dim)
      throw ShapeError("ARM parameter sets have inconsistent dimensions");
    if (r_hat[t].size() != p.output_dim()) throw ShapeError("decoded vector length mismatch");
    equations += p.output_dim();
    for (std::size_t i = 0; i < dim; ++i) {
      const std::pair<std::size_t, std::size_t> key{p.permutation[i], i};
      if (index.try_emplace(key, unknowns.size()).second) unknowns.push_back(key);
    }
  }
  ArmSystem sys;
  sys.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(equations),
                                static_cast<Eigen::Index>(unknowns.size()));
  sys.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(equations));
  Eigen::Index row = 0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    const auto& p = params[t];
    for (std::size_t k = 0; k < p.output_dim(); ++k, ++row) {
      for (std::size_t i = 0; i < dim; ++i)
        sys.a(row, static_cast<Eigen::Index>(index.at({p.permutation[i], i}))) +=
            p.projection(i, k);
      sys.b(row) = r_hat[t][k];
    }
  }
  sys.unknowns = std::move(unknowns);
  return sys;
}

ArmResult arm_attack_real(const std::vector<std::vector<double>>& r_hat,
                          const std::vector<TransformParams>& params,
                          const std::optional<std::vector<double>>& truth) {
  const ArmSystem sys = assemble_arm_system(r_hat, params);
  const std::size_t dim = params.front().dim;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sys.a);
  const Eigen::VectorXd x = cod.solve(sys.b);

  ArmResult res;
  res.equations = static_cast<std::size_t>(sys.a.rows());
  res.unknowns = static_cast<std::size_t>(sys.a.cols());
  res.rank = static_cast<std::size_t>(cod.rank());
  res.residual = (sys.a * x - sys.b).norm();
  res.monomials.assign(x.data(), x.data() + x.size());

  Eigen::MatrixXd products = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                                   static_cast<Eigen::Index>(dim));
  for (std::size_t u = 0; u < sys.unknowns.size(); ++u)
    products(static_cast<Eigen::Index>(sys.unknowns[u].first),
             static_cast<Eigen::Index>(sys.unknowns[u].second)) = x(static_cast<Eigen::Index>(u));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(products, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double s0 = std::sqrt(svd.singularValues()(0));
  Eigen::VectorXd u = svd.matrixU().col(0) * s0;
  Eigen::VectorXd v = svd.matrixV().col(0) * s0;
  if (u.sum() + v.sum() < 0.0) {
    u = -u;
    v = -v;
  }
  res.v1.assign(u.data(), u.data() + u.size());
  res.v2.assign(v.data(), v.data() + v.size());
  if (truth) {
    if (truth->size() != 2 * dim) throw ShapeError("ARM ground truth must hold v1 and v2");
    res.similarity = cosine_similarity(concat(res.v1, res.v2), *truth);
  }
  return res;
}

ArmResult arm_attack(const std::vector<CancellableTemplate>& templates,
                     const std::vector<TransformParams>& params,
                     const std::optional<std::vector<double>>& truth) {
  if (templates.size() != params.size())
    throw ShapeError("ARM needs one parameter set per template");
  std::vector<std::vector<double>> r_hat;
  r_hat.reserve(templates.size());
  for (const auto& t : templates) r_hat.push_back(gray_decode(t.bits, t.meta.quant_range));
  return arm_attack_real(r_hat, params, truth);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("cosine similarity of vectors of different length");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

double standardized_similarity(std::span<const double> a, std::span<const double> b,
                               std::span<const double> mean, std::span<const double> std) {
  if (mean.size() != a.size() || std.size() != a.size())
    throw ShapeError("standardization statistics have the wrong length");
  std::vector<double> za(a.size()), zb(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = std[i] > 0.0 ? std[i] : 1.0;
    za[i] = (a[i] - mean[i]) / s;
    zb[i] = (b[i] - mean[i]) / s;
  }
  return cosine_similarity(za, zb);
}

SecondAttackResult second_attack(const FeatureDataset& ds, const EvalSettings& s,
                                 std::size_t user, AttackCase attack_case,
                                 const HillClimbOutcome& solution, double threshold,
                                 std::size_t n_keys) {
  const auto& subj = ds.subjects.at(user);
  const std::uint64_t own = user_key(s, user);
  if (attack_case == AttackCase::FeatureSpace && solution.solution.size() != 2 * ds.dim)
    throw ShapeError("Case I solution must hold both feature vectors");
  std::vector<std::uint64_t> keys;
  for (std::size_t k = 0; keys.size() < n_keys; ++k) {
    const std::uint64_t key = derive_seed(s.master_key, "fresh", user, k);
    if (key != own) keys.push_back(key);
  }
  std::vector<double> scores(keys.size());
  const auto n = static_cast<std::ptrdiff_t>(keys.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t kk = 0; kk < n; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    const auto params = derive_params(keys[k], ds.dim, s.delta, s.projection);
    const auto renewed = make_template(subj.first, subj.second, params, s.enroll_frames,
                                       quant_range_for(ds, s, user, params));
    if (attack_case == AttackCase::FeatureSpace) {
      const std::span<const double> sol(solution.solution);
      const auto r = transform_frame(sol.first(ds.dim), sol.subspan(ds.dim), params);
      scores[k] = normalized_hamming(gray_encode(r, renewed.meta.quant_range), renewed.bits);
    } else {
      scores[k] = normalized_hamming(solution.solution_bits, renewed.bits);
    }
  }
  SecondAttackResult res;
  res.tests = scores.size();
  res.successes = static_cast<std::size_t>(
      std::count_if(scores.begin(), scores.end(), [&](double x) { return x <= threshold; }));
  res.scores = summarize(scores);
  return res;
}

std::uint64_t brute_force_space(std::uint64_t dim, std::uint64_t bits_per_dim) {
  if (dim == 0 || bits_per_dim == 0) throw ConfigError("brute_force_space needs positive sizes");
  return 2 * dim * bits_per_dim;
}

AttackReport attack_campaign(const FeatureDataset& ds, const EvalSettings& s,
                             const AttackConfig& cfg, std::size_t second_keys) {
  const auto enrolled = enroll_all(ds, s);
  const std::size_t users = ds.subjects.size();
  AttackReport rep;
  rep.attack_case = cfg.attack_case;
  rep.threshold = cfg.threshold;
  rep.users = users;
  rep.per_user.resize(users);

  const auto count = static_cast<std::ptrdiff_t>(users);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t uu = 0; uu < count; ++uu) {
    const auto u = static_cast<std::size_t>(uu);
    ScoreOracle oracle(enrolled[u], user_params(s, u, ds.dim));
    // Public data: every frame of every other subject.
    std::vector<std::vector<double>> public_vectors;
    for (std::size_t o = 0; o < users; ++o) {
      if (o == u) continue;
      const auto& subj = ds.subjects[o];
      for (std::size_t f = 0; f < subj.frame_count(); ++f)
        public_vectors.push_back(concat(subj.first[f], subj.second[f]));
    }
    const SearchBox box = cfg.attack_case == AttackCase::FeatureSpace
                              ? box_from_vectors(public_vectors)
                              : SearchBox{enrolled[u].meta.quant_range.lo,
                                          enrolled[u].meta.quant_range.hi};
    UserAttack ua;
    ua.outcome = hill_climb_attack(oracle, box, cfg, u);
    if (ua.outcome.success) {
      if (cfg.attack_case == AttackCase::FeatureSpace) {
        std::vector<double> mean(2 * ds.dim, 0.0), sd(2 * ds.dim, 0.0);
        for (const auto& v : public_vectors)
          for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
        for (double& m : mean) m /= static_cast<double>(public_vectors.size());
        for (const auto& v : public_vectors)
          for (std::size_t i = 0; i < v.size(); ++i) sd[i] += (v[i] - mean[i]) * (v[i] - mean[i]);
        for (double& x : sd) x = std::sqrt(x / static_cast<double>(public_vectors.size()));
        ua.similarity = standardized_similarity(
            ua.outcome.solution, mean_features(ds.subjects[u], s.enroll_frames), mean, sd);
      }
      ua.second = second_attack(ds, s, u, cfg.attack_case, ua.outcome, cfg.threshold, second_keys);
    }
    rep.per_user[u] = std::move(ua);
  }

  std::vector<double> similarities;
  double attempts = 0.0, sum = 0.0, sum_sq = 0.0;
  for (const auto& ua : rep.per_user) {
    if (!ua.outcome.success) continue;
    ++rep.successes;
    attempts += static_cast<double>(ua.outcome.attempts);
    if (ua.similarity) similarities.push_back(*ua.similarity);
    if (ua.second) {
      rep.second_tests += ua.second->tests;
      rep.second_successes += ua.second->successes;
      const auto& sc = ua.second->scores;
      const auto n = static_cast<double>(sc.count);
      sum += n * sc.mean;
      sum_sq += n * (sc.std * sc.std + sc.mean * sc.mean);
    }
  }
  rep.success_rate = static_cast<double>(rep.successes) / static_cast<double>(users);
  if (rep.successes > 0) rep.mean_attempts = attempts / static_cast<double>(rep.successes);
  rep.similarity = summarize(similarities);
  if (rep.second_tests > 0) {
    // Pooled over every second-attack test.
    const auto n = static_cast<double>(rep.second_tests);
    rep.second_scores.count = rep.second_tests;
    rep.second_scores.mean = sum / n;
    rep.second_scores.std =
        std::sqrt(std::max(0.0, sum_sq / n - rep.second_scores.mean * rep.second_scores.mean));
    rep.sar = static_cast<double>(rep.second_successes) / n;
  }
  return rep;
}

}  // namespace neurolock
