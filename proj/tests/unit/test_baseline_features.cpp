#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support/oracles.hpp"
#include "neurolock/baseline_features.hpp"
#include "neurolock/error.hpp"
#include "neurolock/rng.hpp"

using namespace neurolock;
using std::numbers::pi;

namespace {

std::vector<double> white(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal();
  return x;
}

std::vector<double> sines(std::initializer_list<double> freqs, double fs, std::size_t n) {
  std::vector<double> x(n, 0.0);
  for (double f : freqs)
    for (std::size_t t = 0; t < n; ++t) x[t] += std::sin(2 * pi * f * t / fs);
  return x;
}

}  // namespace

TEST_CASE("Burg reflection coefficients") {
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (double k : ar_reflection_coeffs(white(seed, 320))) CHECK(std::fabs(k) < 0.2);

  double k1 = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed, "ar1");
    std::vector<double> x(2000);
    double prev = 0;
    for (double& v : x) v = prev = 0.9 * prev + rng.normal();
    k1 += ar_reflection_coeffs(x)[0] / 10;
  }
  CHECK(k1 == doctest::Approx(-0.9).epsilon(0.05 / 0.9));

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(12 + rng.below(200));
    for (double& v : x) v = rng.normal() + (trial % 3) * std::sin(0.1 * trial * (&v - x.data()));
    for (double k : ar_reflection_coeffs(x)) {
      CHECK(k >= -1.0);
      CHECK(k <= 1.0);
    }
  }
  CHECK_THROWS_AS(ar_reflection_coeffs(std::vector<double>(100, 2.0)), DegenerateSignal);
}

TEST_CASE("band powers") {
  const auto alpha = band_powers(sines({10.0}, 160.0, 640), 160.0);
  for (std::size_t b = 0; b < 5; ++b)
    if (b != 2) CHECK(alpha[2] >= 10 * alpha[b]);

  for (double p : band_powers(std::vector<double>(640, 0.0), 160.0)) CHECK(p == 0.0);

  // two unit sinusoids carry 0.5 power each
  const auto two = band_powers(sines({5.0, 20.0}, 160.0, 640), 160.0);
  CHECK(two[1] == doctest::Approx(two[3]).epsilon(0.2));
  CHECK(two[1] == doctest::Approx(0.5).epsilon(0.2));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = white(seed, 640);
    double mean = 0, var = 0;
    for (double v : x) mean += v / x.size();
    for (double v : x) var += (v - mean) * (v - mean) / x.size();
    double total = 0;
    for (double p : band_powers(x, 160.0)) total += p;
    CHECK(total <= 1.05 * var);
  }
}

TEST_CASE("fuzzy entropy") {
  std::vector<double> periodic(200);
  for (std::size_t t = 0; t < periodic.size(); ++t) periodic[t] = t % 2 ? 1.0 : -1.0;
  CHECK(fuzzy_entropy(periodic) < 0.2);

  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto x = white(seed, 320);
    CHECK(std::fabs(fuzzy_entropy(x) - oracle::fuzzy_entropy(x)) < 1e-12);
    std::vector<double> scaled(x);
    for (double& v : scaled) v *= 37.5;
    CHECK(std::fabs(fuzzy_entropy(scaled) - fuzzy_entropy(x)) < 1e-9);
    CHECK(fuzzy_entropy(x) >= 0.0);
  }
  CHECK_THROWS_AS(fuzzy_entropy(std::vector<double>(50, 1.0)), DegenerateSignal);
}

TEST_CASE("baseline vectors") {
  Frame fr;
  fr.data = RowMatrix(3, 320);
  Rng rng(4);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t t = 0; t < 320; ++t) fr.data(c, t) = rng.normal();
  const auto ar = ar_features(fr);
  const auto psd = psd_features(fr, 160.0);
  const auto fz = fuzzen_features(fr);
  CHECK(ar.values.size() == 15);
  CHECK(psd.values.size() == 15);
  CHECK(fz.values.size() == 3);
  const auto all = concat_baselines(ar, psd, fz);
  CHECK(all.values.size() == 33);
  CHECK(all.values.size() == baseline_length(BaselineKind::Concat, 3));
  CHECK(all.values[0] == ar.values[0]);
  CHECK(all.values[15] == psd.values[0]);
  CHECK(all.values[30] == fz.values[0]);
  CHECK(fuzzen_features(fr).values == fz.values);
}
