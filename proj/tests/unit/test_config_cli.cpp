#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "commands.hpp"
#include "neurolock/config.hpp"
#include "neurolock/error.hpp"
#include "neurolock/io.hpp"
#include "neurolock/transform.hpp"

using namespace neurolock;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// small cohort so every command finishes in well under a second
const std::vector<std::string> kSmall = {"--dataset.synthetic.n_subjects=5",
                                         "--dataset.synthetic.n_channels=8",
                                         "--dataset.synthetic.duration_s=40"};

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args, bool small = true) {
  if (small) args.insert(args.end(), kSmall.begin(), kSmall.end());
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("neurolock_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST_CASE("config resolution") {
  ::unsetenv("NEUROLOCK_SEED");
  auto cfg = cli::resolve_config("", {{"transform.delta", "0.4"}, {"output", "elsewhere"}});
  CHECK(cfg["transform"]["delta"] == 0.4);
  CHECK(cfg["output"] == "elsewhere");
  CHECK(cfg["seed"] == 1);

  CHECK_THROWS_AS(cli::resolve_config("", {{"transform.nope", "1"}}), ConfigError);
  CHECK_THROWS_AS(cli::resolve_config("", {{"transform.delta", "\"half\""}}), ConfigError);
  CHECK_THROWS_AS(cli::resolve_config("", {{"transform.delta", "1.5"}}), ConfigError);

  ::setenv("NEUROLOCK_SEED", "7", 1);
  CHECK(cli::resolve_config("", {})["seed"] == 7);
  CHECK(cli::resolve_config("", {{"seed", "9"}})["seed"] == 9);
  ::unsetenv("NEUROLOCK_SEED");

  TempDir dir;
  std::ofstream(dir / "c.json") << R"({"seed": 3, "transform": {"enroll_frames": 4}})";
  cfg = cli::resolve_config(dir / "c.json", {{"seed", "5"}});
  CHECK(cfg["seed"] == 5);
  CHECK(cfg["transform"]["enroll_frames"] == 4);
  CHECK(cfg["transform"]["delta"] == 0.5);  // default kept

  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(cli::resolve_config(dir / "bad.json", {}), ConfigError);

  // the hash follows the content
  CHECK(config_hash(cli::resolve_config("", {})) == config_hash(cli::resolve_config("", {})));
  CHECK(config_hash(cli::resolve_config("", {})) !=
        config_hash(cli::resolve_config("", {{"seed", "2"}})));
}

TEST_CASE("exit codes") {
  CHECK(invoke({"eval", "--bogus.key=1"}).code == cli::kConfig);
  CHECK(invoke({"eval", "--transform.delta"}).code == cli::kConfig);
  CHECK(invoke({}, false).code != 0);
  CHECK(invoke({"frobnicate"}).code != 0);
  CHECK(invoke({"--version"}, false).code == 0);
  TempDir dir;
  std::ofstream(dir / "bad.json") << "[1, 2";
  CHECK(invoke({"-c", dir / "bad.json", "eval"}).code == cli::kConfig);
  CHECK(invoke({"eval", "--dataset.source=edf", "--dataset.path=" + dir.path.string()}).code ==
        cli::kConfig);
}

TEST_CASE("extract writes one file per subject and protocol, reproducibly") {
  TempDir dir;
  REQUIRE(invoke({"extract", "-o", dir / "a"}).code == 0);
  REQUIRE(invoke({"extract", "-o", dir / "b"}).code == 0);
  std::size_t csv = 0;
  for (const auto& e : fs::directory_iterator(dir.path / "a")) {
    if (e.path().extension() != ".csv") continue;
    ++csv;
    CHECK(slurp(e.path()) == slurp(dir.path / "b" / e.path().filename()));
  }
  CHECK(csv == 10);
  const auto manifest = json::parse(slurp(dir.path / "a" / "manifest.json"));
  CHECK(manifest["subjects"].size() == 5);
  CHECK(manifest["dim"] == 14);  // 8 channels + 6 global descriptors

  REQUIRE(invoke({"extract", "-o", dir / "c", "--seed=2"}).code == 0);
  CHECK(slurp(dir.path / "a" / "S1_EO.csv") != slurp(dir.path / "c" / "S1_EO.csv"));
}

TEST_CASE("enroll and verify") {
  TempDir dir;
  REQUIRE(invoke({"enroll", "-s", "S1", "-o", dir / "a.ceeg"}).code == 0);
  REQUIRE(invoke({"enroll", "-s", "S1", "-o", dir / "b.ceeg"}).code == 0);
  CHECK(slurp(dir.path / "a.ceeg") == slurp(dir.path / "b.ceeg"));
  REQUIRE(invoke({"enroll", "-s", "S1", "-k", "999", "-o", dir / "k.ceeg"}).code == 0);
  const auto a = read_template(dir.path / "a.ceeg");
  const auto k = read_template(dir.path / "k.ceeg");
  CHECK(a.bits != k.bits);
  CHECK(a.meta.key_id != k.meta.key_id);
  CHECK(a.meta.subject_id == "S1");

  const auto self = invoke({"verify", "-t", dir / "a.ceeg"});
  CHECK(self.code == cli::kOk);
  CHECK(self.out.rfind("accept", 0) == 0);
  CHECK(self.out.find("threshold=0.389") != std::string::npos);

  CHECK(invoke({"verify", "-t", dir / "a.ceeg", "-k", "999"}).code == cli::kData);
  const auto impostor = invoke({"verify", "-t", dir / "a.ceeg", "-s", "S2", "--threshold", "0.05"});
  CHECK(impostor.code == cli::kReject);
  CHECK(impostor.out.rfind("reject", 0) == 0);

  CHECK(invoke({"enroll", "-s", "S9", "-o", dir / "x.ceeg"}).code == cli::kConfig);
  CHECK(invoke({"enroll", "-s", "S1", "--transform.enroll_frames=500", "-o", dir / "x.ceeg"}).code ==
        cli::kConfig);
  std::ofstream(dir / "junk.ceeg") << "CEEG1junk";
  CHECK(invoke({"verify", "-t", dir / "junk.ceeg"}).code == cli::kData);
}

TEST_CASE("eval reports carry provenance and no keys") {
  TempDir dir;
  const auto r = invoke({"eval", "--output=" + dir.path.string(), "--eval.revocability_keys=5"});
  REQUIRE(r.code == 0);
  const auto rep = json::parse(slurp(dir.path / "eval" / "report.json"));
  CHECK(rep["report"] == "eval");
  CHECK(rep.contains("version"));
  CHECK(rep["seed"] == 1);
  const auto cfg = json::parse(slurp(dir.path / "eval" / "config.json"));
  CHECK(rep["config_hash"] == config_hash(cfg));
  CHECK(rep["seeds"].contains("keys"));
  CHECK(rep["body"]["eer"].get<double>() >= 0.0);
  for (const char* f : {"roc.csv", "score_histogram.csv", "unlinkability.csv"})
    CHECK(fs::file_size(dir.path / "eval" / f) > 0);
  // no raw key values in the report
  CHECK(slurp(dir.path / "eval" / "report.json").find("master_key") == std::string::npos);
}

TEST_CASE("extracted features feed later commands") {
  TempDir dir;
  REQUIRE(invoke({"extract", "-o", dir / "feat"}).code == 0);
  REQUIRE(invoke({"enroll", "-s", "S3", "-o", dir / "a.ceeg"}).code == 0);
  REQUIRE(invoke({"enroll", "-s", "S3", "-o", dir / "b.ceeg", "--features.dir=" + (dir / "feat")}).code ==
          0);
  CHECK(read_template(dir.path / "a.ceeg").bits == read_template(dir.path / "b.ceeg").bits);
}

TEST_CASE("synth, attack and slx at small budgets") {
  TempDir dir;
  REQUIRE(invoke({"synth", "-o", dir / "edf"}).code == 0);
  std::size_t edf = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir.path / "edf"))
    edf += e.path().extension() == ".edf";
  CHECK(edf == 10);

  const auto a = invoke({"attack", "--output=" + dir.path.string(), "--attack.max_attempts=150",
                         "--attack.second_keys=4", "--attack.arm_keys=2"});
  REQUIRE(a.code == 0);
  const auto rep = json::parse(slurp(dir.path / "attack" / "report.json"));
  CHECK(rep["body"]["cases"].size() == 2);
  CHECK(rep["body"]["brute_force_log2"] == 2 * 14 * 8);
  CHECK(rep["body"]["arm"]["unknowns"].get<int>() > rep["body"]["arm"]["rank"].get<int>());
  CHECK(fs::exists(dir.path / "attack" / "trace_feature_space.csv"));
  const auto text = slurp(dir.path / "attack" / "report.json");
  CHECK(text.find("\"solution\"") == std::string::npos);

  const auto s = invoke({"slx", "--output=" + dir.path.string(), "--slx.source=clusters",
                         "--slx.seeds=2"});
  REQUIRE(s.code == 0);
  const auto slx = json::parse(slurp(dir.path / "slx" / "report.json"));
  CHECK(slx["body"]["per_seed"].size() == 2);
  CHECK(slx["body"]["intruders_in_training"]["authentication"] == false);
  CHECK(slx["body"]["intruders_in_training"]["classification"] == true);
}
