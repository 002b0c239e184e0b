#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace neurolock {

/// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

/// splitmix64 finalizer; used to decorrelate composed seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Combines a base seed with a purpose label and up to three integer
/// indices into one stream seed.
std::uint64_t derive_seed(std::uint64_t base, std::string_view purpose,
                          std::uint64_t a = 0, std::uint64_t b = 0,
                          std::uint64_t c = 0) noexcept;

/// Deterministic generator on top of mt19937_64. Only the engine output is
/// used (its sequence is fixed by the C++ standard); all distributions are
/// implemented here so results do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t base, std::string_view purpose, std::uint64_t a = 0,
      std::uint64_t b = 0, std::uint64_t c = 0)
      : engine_(derive_seed(base, purpose, a, b, c)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller.
  double normal();

  /// Uniformly random permutation of 0..n-1 (Fisher-Yates).
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace neurolock
