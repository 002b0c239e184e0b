#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "../support/oracles.hpp"
#include "neurolock/connectivity.hpp"
#include "neurolock/dsp.hpp"
#include "neurolock/error.hpp"
#include "neurolock/ingest.hpp"
#include "neurolock/io.hpp"
#include "neurolock/pipeline.hpp"
#include "neurolock/rng.hpp"

using namespace neurolock;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "neurolock_unit";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_bytes(const std::string& name, const std::string& bytes) {
  const fs::path p = scratch(name);
  std::ofstream(p, std::ios::binary) << bytes;
  return p;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

}  // namespace

TEST_CASE("edf: midpoint digital value reads as zero") {
  oracle::EdfSignal s{"C3", -100, 100, -32768, 32767, {0, 0, 0, 0}};
  const auto rec = read_edf(write_bytes("mid.edf", oracle::edf_bytes({s}, 4, 1)));
  REQUIRE(rec.channel_count() == 1);
  REQUIRE(rec.sample_count() == 4);
  const double step = 200.0 / 65535.0;
  for (std::size_t t = 0; t < 4; ++t) CHECK(std::fabs(rec.data(0, t)) <= step);
  CHECK(rec.fs == 4.0);
}

TEST_CASE("edf: physical scaling on three header fixtures") {
  struct Fix {
    double pmin, pmax;
    int dmin, dmax;
    std::vector<std::int16_t> d;
  };
  const std::vector<Fix> fixtures = {
      {-100, 100, -32768, 32767, {-32768, 32767, 100, -100}},
      {0, 50, 0, 1000, {0, 1000, 500, 250}},
      {-3200, 3200, -2048, 2047, {-2048, 2047, 0, 1}},
  };
  int idx = 0;
  for (const auto& f : fixtures) {
    oracle::EdfSignal s{"X", f.pmin, f.pmax, f.dmin, f.dmax, f.d};
    oracle::EdfSignal s2{"Y", f.pmin, f.pmax, f.dmin, f.dmax, f.d};
    const auto rec =
        read_edf(write_bytes("fix" + std::to_string(idx++) + ".edf", oracle::edf_bytes({s, s2}, 4, 1)));
    for (std::size_t t = 0; t < 4; ++t) {
      const double expect = f.pmin + (f.d[t] - f.dmin) * (f.pmax - f.pmin) / (f.dmax - f.dmin);
      CHECK(rec.data(0, t) == doctest::Approx(expect).epsilon(1e-12));
      CHECK(rec.data(1, t) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("edf: annotations are dropped") {
  oracle::EdfSignal a{"C3", -1, 1, -100, 100, {1, 2}};
  oracle::EdfSignal ann{"EDF Annotations", -1, 1, -32768, 32767, {0, 0}};
  oracle::EdfSignal b{"C4", -1, 1, -100, 100, {3, 4}};
  const auto rec = read_edf(write_bytes("ann.edf", oracle::edf_bytes({a, ann, b}, 2, 1)));
  REQUIRE(rec.channel_count() == 2);
  CHECK(rec.channels[0] == "C3");
  CHECK(rec.channels[1] == "C4");
}

TEST_CASE("edf: malformed headers") {
  oracle::EdfSignal s{"C3", -100, 100, -32768, 32767, {0, 0, 0, 0}};
  SUBCASE("header length field disagrees") {
    CHECK_THROWS_AS(read_edf(write_bytes("badlen.edf", oracle::edf_bytes({s}, 4, 1, 1.0, 768))),
                    ParseError);
  }
  SUBCASE("truncated data") {
    auto bytes = oracle::edf_bytes({s}, 4, 1);
    bytes.resize(bytes.size() - 3);
    CHECK_THROWS_AS(read_edf(write_bytes("trunc.edf", bytes)), ParseError);
  }
  SUBCASE("wrong version") {
    auto bytes = oracle::edf_bytes({s}, 4, 1);
    bytes[0] = '1';
    try {
      read_edf(write_bytes("ver.edf", bytes));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset() == 0);
    }
  }
  SUBCASE("zero records") {
    oracle::EdfSignal empty{"C3", -100, 100, -32768, 32767, {}};
    CHECK_THROWS_AS(read_edf(write_bytes("zero.edf", oracle::edf_bytes({empty}, 4, 0))),
                    EmptyRecording);
  }
}

TEST_CASE("edf: write then read within one quantization step") {
  Recording rec;
  rec.fs = 160.0;
  rec.channels = {"a", "b"};
  rec.protocol = Protocol::EO;
  rec.subject_id = "S9";
  rec.data = RowMatrix(2, 480);
  Rng rng(7);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t t = 0; t < 480; ++t) rec.data(c, t) = 40.0 * rng.normal() + 5.0 * c;
  const fs::path p = scratch("rt.edf");
  write_edf(p, rec);
  const auto back = read_edf(p);
  REQUIRE(back.channel_count() == 2);
  REQUIRE(back.sample_count() == 480);
  CHECK(back.fs == 160.0);
  for (std::size_t c = 0; c < 2; ++c) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t t = 0; t < 480; ++t) {
      lo = std::min(lo, rec.data(c, t));
      hi = std::max(hi, rec.data(c, t));
    }
    const double step = (hi - lo) / 65535.0;
    for (std::size_t t = 0; t < 480; ++t) CHECK(std::fabs(back.data(c, t) - rec.data(c, t)) <= step);
  }
}

TEST_CASE("csv: parse and errors") {
  const auto rec = parse_csv_matrix("1,2\n3,4", 160.0, Protocol::EC);
  CHECK(rec.channel_count() == 2);
  CHECK(rec.sample_count() == 2);
  CHECK(rec.data(1, 0) == 3.0);
  CHECK(rec.protocol == Protocol::EC);
  try {
    parse_csv_matrix("1,2\n3", 160.0, Protocol::EO);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
  }
  try {
    parse_csv_matrix("1,2\n3,x", 160.0, Protocol::EO);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
    CHECK(e.col() == 2);
  }
}

TEST_CASE("csv: write then read is exact") {
  Recording rec;
  rec.fs = 128.0;
  rec.channels = {"ch0", "ch1", "ch2"};
  rec.data = RowMatrix(3, 50);
  Rng rng(3);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t t = 0; t < 50; ++t) rec.data(c, t) = rng.normal() * 1e3;
  const fs::path p = scratch("rt.csv");
  write_csv_matrix(p, rec);
  const auto back = read_csv_matrix(p, 128.0, Protocol::OTHER);
  REQUIRE(back.channel_count() == 3);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t t = 0; t < 50; ++t) CHECK(back.data(c, t) == rec.data(c, t));
}

TEST_CASE("readers produce valid recordings on random inputs") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 2 + rng.below(5), cols = 1 + rng.below(30);
    std::string text;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) text += (c ? "," : "") + std::to_string(rng.normal());
      text += "\n";
    }
    const auto rec = parse_csv_matrix(text, 100.0, Protocol::EO);
    CHECK_NOTHROW(validate(rec));
    CHECK(rec.channel_count() == rows);
    CHECK(rec.sample_count() == cols);
  }
}

TEST_CASE("synthesize: determinism, order independence, errors") {
  SyntheticSpec spec;
  spec.n_subjects = 3;
  spec.n_channels = 4;
  spec.duration_s = 4.0;
  const auto a = synthesize(spec);
  const auto b = synthesize(spec);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].data == b[i].data);
  const auto one = synthesize_one(spec, 2, Protocol::EC);
  CHECK(one.data == a[5].data);
  spec.n_channels = 1;
  CHECK_THROWS_AS(synthesize(spec), ConfigError);
}

TEST_CASE("synthesize: coupling matrices are symmetric in [0, 1]") {
  SyntheticSpec spec;
  for (std::size_t s = 0; s < 5; ++s) {
    const RowMatrix c = subject_coupling(spec, s, Protocol::EO);
    for (std::size_t i = 0; i < c.rows(); ++i)
      for (std::size_t j = 0; j < c.cols(); ++j) {
        CHECK(c(i, j) == c(j, i));
        CHECK(c(i, j) >= 0.0);
        CHECK(c(i, j) <= 1.0);
      }
  }
}

TEST_CASE("synthesize: identical noiseless channels are perfectly coupled") {
  SyntheticSpec spec;
  spec.n_subjects = 1;
  spec.n_channels = 4;
  spec.duration_s = 10.0;
  spec.noise_level = 0.0;
  spec.identical_channels = true;
  const auto rec = synthesize_one(spec, 0, Protocol::EO);
  const auto pre = preprocess(rec, DspConfig{});
  for (const auto& fr : pre.band) {
    const auto g = build_graph(instantaneous_phase(fr));
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        if (i != j) CHECK(g.adjacency(i, j) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("synthesize: frames are more alike within a subject than across") {
  SyntheticSpec spec;
  spec.n_subjects = 10;
  spec.n_channels = 8;
  spec.duration_s = 20.0;
  const auto ds = build_dataset(synthesize(spec), FeatureConfig{});
  double within = 0, across = 0;
  std::size_t nw = 0, na = 0;
  for (std::size_t u = 0; u < ds.subjects.size(); ++u)
    for (std::size_t v = 0; v < ds.subjects.size(); ++v)
      for (std::size_t f = 0; f < 5; ++f) {
        const double c = cosine(ds.subjects[u].first[f], ds.subjects[v].first[f + 5]);
        if (u == v) {
          within += c;
          ++nw;
        } else {
          across += c;
          ++na;
        }
      }
  CHECK(within / nw > across / na);
}

TEST_CASE("synthetic spec json round trip") {
  SyntheticSpec spec;
  spec.n_subjects = 7;
  spec.noise_level = 0.3;
  spec.protocols = {Protocol::PHY, Protocol::IMA};
  const auto back = synthetic_spec_from_json(synthetic_spec_to_json(spec));
  CHECK(back.n_subjects == 7);
  CHECK(back.noise_level == 0.3);
  CHECK(back.protocols == spec.protocols);
}
