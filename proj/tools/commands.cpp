#include "commands.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "neurolock/config.hpp"
#include "neurolock/error.hpp"
#include "neurolock/io.hpp"
#include "neurolock/report.hpp"
#include "neurolock/rng.hpp"

namespace neurolock::cli {

namespace fs = std::filesystem;

namespace {

std::size_t find_subject(const FeatureDataset& ds, const std::string& id) {
  for (std::size_t u = 0; u < ds.subjects.size(); ++u)
    if (ds.subjects[u].subject_id == id) return u;
  throw ConfigError("no subject '" + id + "' in the dataset");
}

std::uint64_t parse_key(const std::string& text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("key must be an unsigned 64-bit integer, got '" + text + "'");
  return v;
}

fs::path output_dir(const json& cfg, const char* sub) {
  return fs::path(cfg.at("output").get<std::string>()) / sub;
}

void write_json(const fs::path& p, const json& j) { write_file_atomic(p, j.dump(2) + "\n"); }

FeatureDataset nonempty_features(const json& cfg) {
  FeatureDataset ds = load_features(cfg);
  if (ds.subjects.empty()) throw ConfigError("the dataset holds no subject with both protocols");
  return ds;
}

// Pulls `--a.b=value` and `--a.b value` out of the argument list; everything
// else goes to CLI11.
std::vector<std::pair<std::string, std::string>> split_overrides(std::vector<std::string>& args) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) {
      rest.push_back(a);
      continue;
    }
    const auto eq = a.find('=');
    const std::string name = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    // dotted config paths, plus the two top-level scalars
    if (name.find('.') == std::string::npos && name != "seed" && name != "output") {
      rest.push_back(a);
      continue;
    }
    if (eq != std::string::npos) {
      out.emplace_back(name, a.substr(eq + 1));
    } else {
      if (i + 1 >= args.size()) throw ConfigError("override --" + name + " needs a value");
      out.emplace_back(name, args[++i]);
    }
  }
  args = std::move(rest);
  return out;
}

SampleSet features_as_samples(const FeatureDataset& ds) {
  SampleSet set;
  set.n_subjects = ds.subjects.size();
  for (std::size_t u = 0; u < ds.subjects.size(); ++u) {
    const auto& s = ds.subjects[u];
    for (std::size_t f = 0; f < s.frame_count(); ++f) {
      std::vector<double> x = s.first[f];
      x.insert(x.end(), s.second[f].begin(), s.second[f].end());
      set.x.push_back(std::move(x));
      set.subject.push_back(u);
    }
  }
  return set;
}

int cmd_synth(const json& cfg, const std::string& out_opt, std::ostream& out) {
  const fs::path dir = out_opt.empty() ? output_dir(cfg, "recordings") : fs::path(out_opt);
  const SyntheticSpec spec = synthetic_spec(cfg);
  fs::create_directories(dir);
  std::size_t n = 0;
  for (const auto& rec : synthesize(spec)) {
    write_edf(dir / (rec.subject_id + "_" + std::string(to_string(rec.protocol)) + ".edf"), rec);
    ++n;
  }
  write_file_atomic(dir / "synthetic_spec.json", synthetic_spec_to_json(spec) + "\n");
  out << "wrote " << n << " recordings to " << dir.string() << "\n";
  return kOk;
}

int cmd_extract(json cfg, const std::string& out_opt, std::ostream& out) {
  const fs::path dir = out_opt.empty() ? output_dir(cfg, "features") : fs::path(out_opt);
  cfg["features"]["dir"] = "";  // always extract
  const FeatureDataset ds = nonempty_features(cfg);
  const auto files = write_feature_dir(dir, ds);
  out << "wrote " << files.size() << " files for " << ds.subjects.size() << " subjects to "
      << dir.string() << "\n";
  return kOk;
}

TransformParams params_for_key(const EvalSettings& s, std::uint64_t key, std::size_t dim) {
  return derive_params(key, dim, s.delta, s.projection);
}

int cmd_enroll(const json& cfg, const std::string& subject, const std::string& key_text,
               const std::string& out_opt, std::ostream& out) {
  const FeatureDataset ds = nonempty_features(cfg);
  const EvalSettings s = eval_settings(cfg);
  const std::size_t u = find_subject(ds, subject);
  const auto& subj = ds.subjects[u];
  if (s.enroll_frames == 0 || s.enroll_frames > subj.frame_count())
    throw ConfigError("enroll_frames " + std::to_string(s.enroll_frames) + " exceeds the " +
                      std::to_string(subj.frame_count()) + " frames of subject " + subject);
  const std::uint64_t key = key_text.empty() ? user_key(s, u) : parse_key(key_text);
  const TransformParams params = params_for_key(s, key, ds.dim);
  const CancellableTemplate t = make_template(subj.first, subj.second, params, s.enroll_frames,
                                              quant_range_for(ds, s, u, params), subject);
  const fs::path path =
      out_opt.empty() ? output_dir(cfg, "templates") / (subject + ".ceeg") : fs::path(out_opt);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_template(path, t);
  out << "enrolled " << subject << " key_id=" << t.meta.key_id << " bits=" << t.bits.bit_count
      << " -> " << path.string() << "\n";
  return kOk;
}

struct VerifyArgs {
  std::string template_path, subject, key;
  long first_frame = -1;
  long frames = -1;
  double threshold = 0.389;
};

int cmd_verify(const json& cfg, const VerifyArgs& a, std::ostream& out) {
  const CancellableTemplate enrolled = read_template(a.template_path);
  const FeatureDataset ds = nonempty_features(cfg);
  const EvalSettings s = eval_settings(cfg);
  const std::size_t u = find_subject(ds, a.subject.empty() ? enrolled.meta.subject_id : a.subject);
  const auto& subj = ds.subjects[u];
  const std::size_t first = a.first_frame < 0 ? s.enroll_frames : static_cast<std::size_t>(a.first_frame);
  const std::size_t frames = a.frames < 0 ? s.test_frames : static_cast<std::size_t>(a.frames);
  if (frames == 0 || first + frames > subj.frame_count())
    throw ConfigError("query frames [" + std::to_string(first) + ", " +
                      std::to_string(first + frames) + ") fall outside the " +
                      std::to_string(subj.frame_count()) + " frames of " + subj.subject_id);
  const std::uint64_t key = a.key.empty() ? user_key(s, u) : parse_key(a.key);
  const TransformParams params = params_for_key(s, key, ds.dim);
  const std::vector<std::vector<double>> q1(subj.first.begin() + first,
                                            subj.first.begin() + first + frames);
  const std::vector<std::vector<double>> q2(subj.second.begin() + first,
                                            subj.second.begin() + first + frames);
  const CancellableTemplate query =
      make_template(q1, q2, params, frames, enrolled.meta.quant_range, subj.subject_id);
  const MatchResult m = match(query, enrolled, a.threshold);
  char line[160];
  std::snprintf(line, sizeof line, "%s score=%.6f raw=%zu threshold=%.6f\n",
                m.accept ? "accept" : "reject", m.score, m.raw, m.threshold);
  out << line;
  return m.accept ? kOk : kReject;
}

json with_header(const std::string& kind, const json& cfg, json body) {
  json j = report_header(kind, cfg);
  j["body"] = std::move(body);
  return j;
}

int cmd_eval(const json& cfg, std::ostream& out) {
  const FeatureDataset ds = nonempty_features(cfg);
  const EvalSettings s = eval_settings(cfg);
  const auto& e = cfg.at("eval");
  EvalOptions o;
  o.revocability_keys = e.at("revocability_keys").get<std::size_t>();
  o.unlinkability_keys = e.at("unlinkability_keys").get<std::size_t>();
  o.unlinkability_bins = e.at("unlinkability_bins").get<std::size_t>();
  o.decidability = e.at("decidability").get<bool>();
  const EvalRun run = run_evaluation(ds, s, o);
  const fs::path dir = output_dir(cfg, "eval");
  fs::create_directories(dir);
  write_json(dir / "report.json", with_header("eval", cfg, to_json(run.report)));
  write_file_atomic(dir / "roc.csv", roc_csv(run.report.roc));
  write_file_atomic(dir / "score_histogram.csv",
                    histogram_csv({{"genuine", &run.scores.genuine},
                                   {"impostor", &run.scores.impostor},
                                   {"pseudo_impostor", &run.scores.pseudo_impostor}}));
  write_file_atomic(dir / "unlinkability.csv", unlinkability_csv(run.report.unlinkability));
  write_json(dir / "config.json", cfg);
  char line[256];
  std::snprintf(line, sizeof line,
                "subjects=%zu genuine=%zu impostor=%zu EER=%.4f threshold=%.4f D_sys=%.4f\n",
                run.report.n_subjects, run.report.genuine_tests, run.report.impostor_tests,
                run.report.eer.eer, run.report.eer.threshold, run.report.unlinkability.d_sys);
  out << line << "reports in " << dir.string() << "\n";
  return kOk;
}

int cmd_attack(const json& cfg, std::ostream& out) {
  const FeatureDataset ds = nonempty_features(cfg);
  const EvalSettings s = eval_settings(cfg);
  const auto& a = cfg.at("attack");
  double threshold = 0.0;
  std::string threshold_source = "config";
  if (a.at("threshold").is_null()) {
    const ScoreSet sc = protocol_scores(ds, s);
    threshold = eer(sc.genuine, sc.impostor).threshold;
    threshold_source = "eer";
  } else {
    threshold = a.at("threshold").get<double>();
  }
  const fs::path dir = output_dir(cfg, "attack");
  fs::create_directories(dir);

  json body = {{"threshold", threshold}, {"threshold_source", threshold_source}};
  json cases = json::array();
  for (const auto& name : a.at("cases")) {
    const AttackCase c = parse_attack_case(name.get<std::string>());
    const AttackReport r =
        attack_campaign(ds, s, attack_config(cfg, c, threshold), a.at("second_keys").get<std::size_t>());
    cases.push_back(to_json(r));
    write_file_atomic(dir / ("trace_" + std::string(to_string(c)) + ".csv"), trace_csv(r));
    char line[200];
    std::snprintf(line, sizeof line, "%s: SR=%.3f N_att=%.0f SAR=%.4f (%zu/%zu)\n",
                  std::string(to_string(c)).c_str(), r.success_rate, r.mean_attempts, r.sar,
                  r.second_successes, r.second_tests);
    out << line;
  }
  body["cases"] = cases;

  // ARM on the first subject's enrolment under arm_keys keys.
  const std::size_t n_keys = a.at("arm_keys").get<std::size_t>();
  if (n_keys > 0) {
    const auto& subj = ds.subjects.front();
    std::vector<CancellableTemplate> templates;
    std::vector<TransformParams> params;
    for (std::size_t k = 0; k < n_keys; ++k) {
      params.push_back(params_for_key(s, derive_seed(s.master_key, "arm", k), ds.dim));
      templates.push_back(make_template(subj.first, subj.second, params.back(), s.enroll_frames,
                                        quant_range_for(ds, s, 0, params.back())));
    }
    const ArmResult arm = arm_attack(templates, params, mean_features(subj, s.enroll_frames));
    json aj = to_json(arm);
    aj["keys"] = n_keys;
    body["arm"] = aj;
    out << "ARM: rank " << arm.rank << " of " << arm.unknowns << " unknowns\n";
  }
  body["brute_force_log2"] = brute_force_space(ds.dim, 8);
  write_json(dir / "report.json", with_header("attack", cfg, body));
  write_json(dir / "config.json", cfg);
  out << "reports in " << dir.string() << "\n";
  return kOk;
}

}  // namespace

SlxSummary run_slx(const json& cfg) {
  const auto& x = cfg.at("slx");
  const std::size_t seeds = x.at("seeds").get<std::size_t>();
  if (seeds == 0) throw ConfigError("slx.seeds must be positive");
  const std::uint64_t base = derive_seed(master_seed(cfg), "slx");
  const bool clusters = x.at("source").get<std::string>() == "clusters";
  SampleSet fixed;
  if (!clusters) {
    fixed = features_as_samples(nonempty_features(cfg));
  }
  SlxSummary sum;
  for (std::size_t k = 0; k < seeds; ++k) {
    const std::uint64_t seed = derive_seed(base, "seed", k);
    SampleSet generated;
    if (clusters) {
      const auto& c = x.at("clusters");
      generated = synthetic_clusters(c.at("subjects").get<std::size_t>(),
                                     c.at("samples").get<std::size_t>(),
                                     c.at("dim").get<std::size_t>(),
                                     c.at("separation").get<double>(), seed);
    }
    const SampleSet& data = clusters ? generated : fixed;
    const auto configs = default_pitfall_configs(data.n_subjects);
    auto rows = pitfall_report(data, configs, seed);
    if (sum.mean_rows.empty()) {
      sum.mean_rows = rows;
      for (auto& r : sum.mean_rows) r.accuracy = r.far = r.frr = r.classifier_eer = 0.0;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sum.mean_rows[i].accuracy += rows[i].accuracy / static_cast<double>(seeds);
      sum.mean_rows[i].far += rows[i].far / static_cast<double>(seeds);
      sum.mean_rows[i].frr += rows[i].frr / static_cast<double>(seeds);
      sum.mean_rows[i].classifier_eer += rows[i].classifier_eer / static_cast<double>(seeds);
    }
    // rows[0] is the classification procedure, rows[1] the first authentication one.
    if (rows.at(1).far < rows.at(0).far) ++sum.seeds_authentication_lower;
    const SlMetrics mc = eval_classification_style(data, configs[0].split, seed);
    const SlMetrics ma = eval_authentication_style(data, configs[1].split, configs[1].n_users, seed);
    sum.leak_classification = sum.leak_classification || training_leaks_intruders(data, mc);
    sum.leak_authentication = sum.leak_authentication || training_leaks_intruders(data, ma);
    sum.per_seed.push_back(std::move(rows));
  }
  sum.far_classification = sum.mean_rows.at(0).far;
  sum.far_authentication = sum.mean_rows.at(1).far;
  return sum;
}

namespace {

int cmd_slx(const json& cfg, std::ostream& out) {
  const SlxSummary s = run_slx(cfg);
  const fs::path dir = output_dir(cfg, "slx");
  fs::create_directories(dir);
  json per_seed = json::array();
  for (const auto& rows : s.per_seed) per_seed.push_back(to_json(rows));
  json body = {{"mean", to_json(s.mean_rows)},
               {"per_seed", per_seed},
               {"far_authentication", s.far_authentication},
               {"far_classification", s.far_classification},
               {"seeds_authentication_lower", s.seeds_authentication_lower},
               {"intruders_in_training", {{"classification", s.leak_classification},
                                          {"authentication", s.leak_authentication}}}};
  write_json(dir / "report.json", with_header("slx", cfg, body));
  write_file_atomic(dir / "pitfall.csv", pitfall_csv(s.mean_rows));
  write_json(dir / "config.json", cfg);
  for (const auto& r : s.mean_rows) {
    char line[200];
    std::snprintf(line, sizeof line, "%-40s acc=%.4f FAR=%.4f FRR=%.4f\n", r.evaluation.c_str(),
                  r.accuracy, r.far, r.frr);
    out << line;
  }
  return kOk;
}

}  // namespace

json resolve_config(const std::string& config_file,
                    const std::vector<std::pair<std::string, std::string>>& overrides) {
  json user = json::object();
  if (!config_file.empty()) {
    std::string text;
    try {
      text = read_file_bytes(config_file);
    } catch (const Error& e) {
      throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    try {
      user = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
  }
  json cfg = merge_config(user);
  if (const char* env = std::getenv("NEUROLOCK_SEED"); env && *env)
    apply_override(cfg, "seed", env);
  for (const auto& [path, value] : overrides) apply_override(cfg, path, value);
  validate_config(cfg);
  return cfg;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args = raw_args;
  std::vector<std::pair<std::string, std::string>> overrides;
  try {
    overrides = split_overrides(args);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  }

  CLI::App app{"Cancellable EEG templates: extraction, enrollment, verification and evaluation",
               "neurolock"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("-c,--config", config_file, "JSON run configuration")->check(CLI::ExistingFile);
  app.footer("Any config value can be set with --section.key=value, e.g. --transform.delta=0.4.\n"
             "NEUROLOCK_SEED overrides the master seed.");

  std::string out_path;
  auto* synth = app.add_subcommand("synth", "write the synthetic cohort as EDF files");
  synth->add_option("-o,--out", out_path, "output directory");
  auto* extract = app.add_subcommand("extract", "extract per-frame features to a directory");
  extract->add_option("-o,--out", out_path, "output directory");

  std::string subject, key;
  auto* enroll = app.add_subcommand("enroll", "write a cancellable template");
  enroll->add_option("-s,--subject", subject, "subject id")->required();
  enroll->add_option("-k,--key", key, "user key (default: derived from the master seed)");
  enroll->add_option("-o,--out", out_path, "template file");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "match query frames against a template");
  verify->add_option("-t,--template", va.template_path, "template file")->required()->check(CLI::ExistingFile);
  verify->add_option("-s,--subject", va.subject, "subject whose frames form the query");
  verify->add_option("--first-frame", va.first_frame, "first query frame (default: enroll_frames)");
  verify->add_option("--frames", va.frames, "query frames (default: test_frames)");
  verify->add_option("-k,--key", va.key, "user key");
  verify->add_option("--threshold", va.threshold, "accept when distance <= threshold")
      ->capture_default_str();

  auto* eval = app.add_subcommand("eval", "EER, decidability, revocability and unlinkability");
  auto* attack = app.add_subcommand("attack", "hill-climbing, second attack, ARM and brute force");
  auto* slx = app.add_subcommand("slx", "classifier evaluation pitfall table");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const json cfg = resolve_config(config_file, overrides);
    if (synth->parsed()) return cmd_synth(cfg, out_path, out);
    if (extract->parsed()) return cmd_extract(cfg, out_path, out);
    if (enroll->parsed()) return cmd_enroll(cfg, subject, key, out_path, out);
    if (verify->parsed()) return cmd_verify(cfg, va, out);
    if (eval->parsed()) return cmd_eval(cfg, out);
    if (attack->parsed()) return cmd_attack(cfg, out);
    if (slx->parsed()) return cmd_slx(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const IncompatibleTemplates& e) {
    err << "incompatible templates: " << e.what() << "\n";
    return kData;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
  return kConfig;
}

}  // namespace neurolock::cli
