#include "neurolock/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <regex>
#include <set>

#include "neurolock/error.hpp"
#include "neurolock/io.hpp"
#include "neurolock/rng.hpp"

namespace neurolock {

namespace fs = std::filesystem;

namespace {

const char* type_name(const json& v) {
  if (v.is_null()) return "null";
  if (v.is_boolean()) return "boolean";
  if (v.is_number()) return "number";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  return "object";
}

// Values must match the default's type; a null default accepts a number.
void check_types(const json& value, const json& schema, const std::string& where) {
  if (schema.is_object()) {
    if (!value.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [k, v] : value.items()) {
      if (!schema.contains(k)) throw ConfigError("unknown config key '" + where + (where.empty() ? "" : ".") + k + "'");
      check_types(v, schema.at(k), where + (where.empty() ? "" : ".") + k);
    }
    return;
  }
  if (schema.is_null()) {
    if (!value.is_null() && !value.is_number())
      throw ConfigError(where + ": expected a number or null, got " + type_name(value));
    return;
  }
  const bool ok = (schema.is_number() && value.is_number()) ||
                  (schema.is_boolean() && value.is_boolean()) ||
                  (schema.is_string() && value.is_string()) ||
                  (schema.is_array() && value.is_array());
  if (!ok)
    throw ConfigError(where + ": expected " + type_name(schema) + ", got " + type_name(value));
}

std::size_t as_count(const json& v, const char* what) {
  if (!v.is_number() || v.get<double>() < 0 || v.get<double>() != std::floor(v.get<double>()))
    throw ConfigError(std::string(what) + " must be a non-negative integer");
  return v.get<std::size_t>();
}

std::string csv_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

json default_config() {
  json synthetic = json::parse(synthetic_spec_to_json(SyntheticSpec{}));
  synthetic["master_seed"] = nullptr;  // null: use the master seed
  const DspConfig dsp;
  const EvalSettings ev;
  const AttackConfig at;
  return {
      {"schema", kConfigSchema},
      {"seed", 1},
      {"dataset",
       {{"source", "synthetic"},
        {"path", ""},
        {"fs", 160.0},
        {"protocols", {"EO", "EC"}},
        {"synthetic", synthetic}}},
      {"dsp",
       {{"prefilter_low", dsp.prefilter_low},
        {"prefilter_high", dsp.prefilter_high},
        {"band_low", dsp.band_low},
        {"band_high", dsp.band_high},
        {"frame_seconds", dsp.frame_seconds},
        {"overlap", dsp.overlap},
        {"fir_order", dsp.fir_order}}},
      {"features", {{"kind", "graph"}, {"rho_bins", 0}, {"dir", ""}}},
      {"transform",
       {{"delta", ev.delta},
        {"enroll_frames", ev.enroll_frames},
        {"test_frames", ev.test_frames},
        {"quant_policy", std::string(to_string(ev.quant_policy))},
        {"projection", "uniform"},
        {"key_policy", std::string(to_string(ev.key_policy))}}},
      {"eval",
       {{"revocability_keys", 50},
        {"unlinkability_keys", 6},
        {"unlinkability_bins", 50},
        {"decidability", true}}},
      {"attack",
       {{"cases", {"feature_space", "template_space"}},
        {"threshold", nullptr},  // null: the EER threshold of the evaluation protocol
        {"max_attempts", at.max_attempts},
        {"restarts", at.restarts},
        {"step_fraction", at.step_fraction},
        {"second_keys", 200},
        {"arm_keys", 3}}},
      {"slx",
       {{"source", "features"},
        {"seeds", 20},
        {"clusters", {{"subjects", 40}, {"samples", 30}, {"dim", 10}, {"separation", 1.0}}}}},
      {"output", "out"},
  };
}

json merge_config(const json& user) {
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  json cfg = default_config();
  check_types(user, cfg, "");
  cfg.merge_patch(user);
  // merge_patch drops keys set to null; restore nullable defaults.
  if (!cfg["attack"].contains("threshold")) cfg["attack"]["threshold"] = nullptr;
  if (!cfg["dataset"]["synthetic"].contains("master_seed"))
    cfg["dataset"]["synthetic"]["master_seed"] = nullptr;
  validate_config(cfg);
  return cfg;
}

void apply_override(json& cfg, std::string_view path, std::string_view value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = std::string(value);
  }
  const json schema = default_config();
  json* node = &cfg;
  const json* sch = &schema;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = path.find('.', pos);
    const std::string key(path.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos));
    if (key.empty() || !sch->is_object() || !sch->contains(key))
      throw ConfigError("unknown config key '" + std::string(path) + "'");
    sch = &sch->at(key);
    if (dot == std::string_view::npos) {
      check_types(parsed, *sch, std::string(path));
      (*node)[key] = parsed;
      break;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

void validate_config(const json& cfg) {
  check_types(cfg, default_config(), "");
  if (cfg.at("schema").get<int>() != kConfigSchema)
    throw ConfigError("unsupported config schema " + cfg.at("schema").dump());
  as_count(cfg.at("seed"), "seed");
  const auto& ds = cfg.at("dataset");
  const std::string source = ds.at("source");
  if (source != "synthetic" && source != "edf" && source != "csv")
    throw ConfigError("dataset.source must be synthetic, edf or csv");
  if (source != "synthetic" && ds.at("path").get<std::string>().empty())
    throw ConfigError("dataset.path is required for " + source + " data");
  if (ds.at("protocols").size() != 2) throw ConfigError("dataset.protocols must name two protocols");
  for (const auto& p : ds.at("protocols")) parse_protocol(p.get<std::string>());
  parse_feature_kind(cfg.at("features").at("kind").get<std::string>());
  const auto& t = cfg.at("transform");
  const double delta = t.at("delta");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("transform.delta must lie in (0, 1)");
  if (as_count(t.at("enroll_frames"), "transform.enroll_frames") < 1 ||
      as_count(t.at("test_frames"), "transform.test_frames") < 1)
    throw ConfigError("transform.enroll_frames and transform.test_frames must be >= 1");
  parse_quant_policy(t.at("quant_policy").get<std::string>());
  parse_key_policy(t.at("key_policy").get<std::string>());
  const std::string proj = t.at("projection");
  if (proj != "uniform" && proj != "gaussian") throw ConfigError("transform.projection must be uniform or gaussian");
  const auto& a = cfg.at("attack");
  for (const auto& c : a.at("cases")) parse_attack_case(c.get<std::string>());
  if (!a.at("threshold").is_null()) {
    const double th = a.at("threshold");
    if (!(th >= 0.0 && th <= 1.0)) throw ConfigError("attack.threshold must lie in [0, 1]");
  }
  if (as_count(a.at("max_attempts"), "attack.max_attempts") < 1)
    throw ConfigError("attack.max_attempts must be >= 1");
  const std::string sl = cfg.at("slx").at("source");
  if (sl != "features" && sl != "clusters") throw ConfigError("slx.source must be features or clusters");
}

std::string config_hash(const json& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.dump())));
  return buf;
}

std::uint64_t master_seed(const json& cfg) { return cfg.at("seed").get<std::uint64_t>(); }

SyntheticSpec synthetic_spec(const json& cfg) {
  json s = cfg.at("dataset").at("synthetic");
  if (s.at("master_seed").is_null()) s["master_seed"] = master_seed(cfg);
  return synthetic_spec_from_json(s.dump());
}

FeatureConfig feature_config(const json& cfg) {
  FeatureConfig fc;
  const auto& d = cfg.at("dsp");
  fc.dsp.prefilter_low = d.at("prefilter_low");
  fc.dsp.prefilter_high = d.at("prefilter_high");
  fc.dsp.band_low = d.at("band_low");
  fc.dsp.band_high = d.at("band_high");
  fc.dsp.frame_seconds = d.at("frame_seconds");
  fc.dsp.overlap = d.at("overlap");
  fc.dsp.fir_order = as_count(d.at("fir_order"), "dsp.fir_order");
  fc.kind = parse_feature_kind(cfg.at("features").at("kind").get<std::string>());
  fc.rho_bins = as_count(cfg.at("features").at("rho_bins"), "features.rho_bins");
  fc.seed = derive_seed(master_seed(cfg), "features");
  return fc;
}

EvalSettings eval_settings(const json& cfg) {
  const auto& t = cfg.at("transform");
  EvalSettings s;
  s.enroll_frames = as_count(t.at("enroll_frames"), "transform.enroll_frames");
  s.test_frames = as_count(t.at("test_frames"), "transform.test_frames");
  s.delta = t.at("delta");
  s.key_policy = parse_key_policy(t.at("key_policy").get<std::string>());
  s.quant_policy = parse_quant_policy(t.at("quant_policy").get<std::string>());
  s.projection = t.at("projection") == "gaussian" ? ProjectionDistribution::Gaussian
                                                  : ProjectionDistribution::Uniform;
  s.master_key = derive_seed(master_seed(cfg), "keys");
  return s;
}

AttackConfig attack_config(const json& cfg, AttackCase attack_case, double threshold) {
  const auto& a = cfg.at("attack");
  AttackConfig ac;
  ac.attack_case = attack_case;
  ac.threshold = threshold;
  ac.max_attempts = as_count(a.at("max_attempts"), "attack.max_attempts");
  ac.restarts = as_count(a.at("restarts"), "attack.restarts");
  ac.step_fraction = a.at("step_fraction");
  ac.seed = derive_seed(master_seed(cfg), "attack");
  return ac;
}

std::pair<std::string, Protocol> parse_recording_name(const std::string& stem) {
  static const std::regex physionet(R"((S\d+)R(\d+))");
  std::smatch m;
  if (std::regex_match(stem, m, physionet)) {
    const int run = std::stoi(m[2].str());
    Protocol p = Protocol::OTHER;
    if (run == 1) p = Protocol::EO;
    else if (run == 2) p = Protocol::EC;
    else if (run >= 3 && run <= 14) p = run % 2 == 1 ? Protocol::PHY : Protocol::IMA;
    return {m[1].str(), p};
  }
  const auto us = stem.rfind('_');
  if (us == std::string::npos || us == 0)
    throw ConfigError("cannot tell subject and protocol from file name '" + stem + "'");
  return {stem.substr(0, us), parse_protocol(stem.substr(us + 1))};
}

std::vector<Recording> load_recordings(const json& cfg) {
  const auto& ds = cfg.at("dataset");
  const std::string source = ds.at("source");
  if (source == "synthetic") return synthesize(synthetic_spec(cfg));

  const fs::path dir = ds.at("path").get<std::string>();
  if (!fs::is_directory(dir)) throw ConfigError("dataset.path '" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == "." + source) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Recording> out;
  // PhysioNet runs of one protocol (e.g. R03/R07/R11) would collide, so
  // only the first file per subject and protocol is kept.
  std::set<std::pair<std::string, Protocol>> seen;
  for (const auto& f : files) {
    const auto [subject, protocol] = parse_recording_name(f.stem().string());
    if (!seen.insert({subject, protocol}).second) continue;
    Recording rec = source == "edf" ? read_edf(f) : read_csv_matrix(f, ds.at("fs").get<double>(), protocol);
    rec.subject_id = subject;
    rec.protocol = protocol;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<fs::path> write_feature_dir(const fs::path& dir, const FeatureDataset& ds) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  json manifest = {{"format", "neurolock-features"},
                   {"schema", 1},
                   {"kind", std::string(to_string(ds.kind))},
                   {"dim", ds.dim},
                   {"protocols", {std::string(to_string(ds.first_protocol)),
                                  std::string(to_string(ds.second_protocol))}},
                   {"subjects", json::array()}};
  auto write_frames = [&](const std::string& subject, Protocol p,
                          const std::vector<std::vector<double>>& frames) {
    std::string text;
    for (const auto& f : frames) {
      for (std::size_t j = 0; j < f.size(); ++j) {
        if (j) text += ',';
        text += csv_number(f[j]);
      }
      text += '\n';
    }
    const fs::path path = dir / (subject + "_" + std::string(to_string(p)) + ".csv");
    write_file_atomic(path, text);
    written.push_back(path);
  };
  for (const auto& s : ds.subjects) {
    manifest["subjects"].push_back(s.subject_id);
    write_frames(s.subject_id, ds.first_protocol, s.first);
    if (ds.second_protocol != ds.first_protocol) write_frames(s.subject_id, ds.second_protocol, s.second);
  }
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  written.push_back(dir / "manifest.json");
  return written;
}

FeatureDataset read_feature_dir(const fs::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file_bytes(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw ParseError("feature manifest: " + std::string(e.what()));
  }
  FeatureDataset ds;
  try {
    ds.kind = parse_feature_kind(manifest.at("kind").get<std::string>());
    ds.dim = manifest.at("dim").get<std::size_t>();
    ds.first_protocol = parse_protocol(manifest.at("protocols").at(0).get<std::string>());
    ds.second_protocol = parse_protocol(manifest.at("protocols").at(1).get<std::string>());
    for (const auto& id : manifest.at("subjects")) {
      SubjectFeatures s;
      s.subject_id = id.get<std::string>();
      auto read_frames = [&](Protocol p) {
        const fs::path path = dir / (s.subject_id + "_" + std::string(to_string(p)) + ".csv");
        const Recording m = parse_csv_matrix(read_file_bytes(path), 1.0, p);
        if (m.data.cols() != ds.dim) throw ShapeError(path.string() + " has the wrong width");
        std::vector<std::vector<double>> frames;
        for (std::size_t r = 0; r < m.data.rows(); ++r) {
          const auto row = m.data.row(r);
          frames.emplace_back(row.begin(), row.end());
        }
        return frames;
      };
      s.first = read_frames(ds.first_protocol);
      s.second = ds.second_protocol == ds.first_protocol ? s.first : read_frames(ds.second_protocol);
      ds.subjects.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ParseError("feature manifest: " + std::string(e.what()));
  }
  if (ds.subjects.empty()) throw EmptyRecording("feature directory lists no subjects");
  return ds;
}

FeatureDataset load_features(const json& cfg) {
  const std::string dir = cfg.at("features").at("dir");
  if (!dir.empty() && fs::exists(fs::path(dir) / "manifest.json")) return read_feature_dir(dir);
  const auto& prot = cfg.at("dataset").at("protocols");
  const auto recordings = load_recordings(cfg);
  if (recordings.empty()) throw ConfigError("dataset holds no recordings");
  return build_dataset(recordings, feature_config(cfg), parse_protocol(prot.at(0).get<std::string>()),
                       parse_protocol(prot.at(1).get<std::string>()));
}

}  // namespace neurolock
