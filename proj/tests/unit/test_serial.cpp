#include <doctest.h>

#include <cmath>

#include "neurolock/baseline_features.hpp"
#include "neurolock/graph_features.hpp"
#include "neurolock/matching_eval.hpp"
#include "neurolock/rng.hpp"
#include "neurolock/serial.hpp"

using namespace neurolock;

// the OpenMP kernels against their single-threaded references

namespace {

double max_diff(const RowMatrix& a, const RowMatrix& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  double d = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  return d;
}

RowMatrix random_phase(Rng& rng, std::size_t channels, std::size_t samples) {
  RowMatrix p(channels, samples);
  for (auto& x : p.values()) x = rng.uniform(-M_PI, M_PI);
  return p;
}

}  // namespace

TEST_CASE("zero-phase filter") {
  Rng rng(1);
  Recording rec;
  rec.fs = 160.0;
  rec.data = RowMatrix(5, 1200);
  for (std::size_t c = 0; c < 5; ++c) rec.channels.push_back("C" + std::to_string(c));
  for (auto& x : rec.data.values()) x = rng.normal();
  const auto filt = design_bandpass(160.0, 8.0, 30.0, 64);
  const auto fast = filter_zero_phase(rec, filt);
  const auto slow = serial::filter_zero_phase(rec, filt);
  CHECK(max_diff(fast.data, slow.data) < 1e-10);
}

TEST_CASE("graph construction and distances") {
  Rng rng(2);
  for (int t = 0; t < 5; ++t) {
    auto phase = random_phase(rng, 12, 320);
    // couple a few channels so weights spread out
    for (std::size_t s = 0; s < 320; ++s) phase(1, s) = phase(0, s) + 0.3 * rng.normal();
    const auto a = build_graph(phase);
    const auto b = serial::build_graph(phase);
    CHECK(a.adjacency == b.adjacency);
    CHECK(a.bins == b.bins);
    CHECK(max_diff(distance_matrix(a), serial::distance_matrix(a)) == 0.0);
  }
}

TEST_CASE("fuzzy entropy") {
  Rng rng(3);
  std::vector<double> x(320);
  for (auto& v : x) v = rng.normal();
  CHECK(fuzzy_entropy(x) == doctest::Approx(serial::fuzzy_entropy(x)).epsilon(1e-12));
}

TEST_CASE("score matrix") {
  Rng rng(4);
  std::vector<BitString> q, r;
  std::vector<std::vector<std::uint8_t>> qb, rb;
  for (int i = 0; i < 40; ++i) {
    BitString b;
    b.bit_count = 280;
    b.bytes.resize(35);
    for (auto& byte : b.bytes) byte = static_cast<std::uint8_t>(rng.below(256));
    (i < 15 ? q : r).push_back(b);
    (i < 15 ? qb : rb).push_back(b.bytes);
  }
  CHECK(max_diff(score_matrix(q, r), serial::hamming_matrix(qb, rb)) == 0.0);
}
