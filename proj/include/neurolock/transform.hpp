#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neurolock/matrix.hpp"

namespace neurolock {

enum class ProjectionDistribution { Uniform, Gaussian };

/// Everything a key determines. Revocation replaces the whole struct.
struct TransformParams {
  std::uint64_t user_key = 0;
  std::size_t dim = 0;
  double delta = 0.5;
  /// 0-based: permuted[i] = v[permutation[i]].
  std::vector<std::size_t> permutation;
  /// dim x round(delta * dim).
  RowMatrix projection;

  std::size_t output_dim() const noexcept { return projection.cols(); }
};

/// Public, non-reversible identifier of a key (stored in templates and
/// reports instead of the key itself).
std::string key_id(std::uint64_t user_key);

/// round(delta * dim), the projected dimension.
std::size_t projected_dim(std::size_t dim, double delta);

/// Permutation and projection are drawn from independent streams seeded by
/// (user_key, purpose label). Requires dim >= 2, 0 < delta < 1 and
/// 1 <= round(delta * dim) < dim.
TransformParams derive_params(std::uint64_t user_key, std::size_t dim, double delta,
                              ProjectionDistribution dist = ProjectionDistribution::Uniform);

/// Builds params from explicit values; `permutation_1based` uses 1..dim.
TransformParams params_from_literals(const std::vector<std::size_t>& permutation_1based,
                                     const RowMatrix& projection, std::uint64_t user_key = 0);

/// c[i] = v1[p[i]] * v2[i].
std::vector<double> combine(std::span<const double> v1, std::span<const double> v2,
                            const TransformParams& params);

/// r = c . M (row vector times matrix).
std::vector<double> project(std::span<const double> c, const TransformParams& params);

/// project(combine(v1, v2)).
std::vector<double> transform_frame(std::span<const double> v1, std::span<const double> v2,
                                    const TransformParams& params);

/// Per-dimension quantization interval.
struct QuantRange {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t size() const noexcept { return lo.size(); }
  friend bool operator==(const QuantRange&, const QuantRange&) = default;
};

/// Range from a set of projected vectors: per-dimension [min, max] widened
/// by `margin` times the span on each side. A flat dimension gets half-width
/// margin * max(|value|, 1e-6).
QuantRange range_from_vectors(const std::vector<std::vector<double>>& vectors,
                              double margin = 0.1);

/// Packed bit string, MSB-first within bytes.
struct BitString {
  std::vector<std::uint8_t> bytes;
  std::size_t bit_count = 0;

  bool bit(std::size_t i) const { return (bytes[i / 8] >> (7 - i % 8)) & 1u; }
  friend bool operator==(const BitString&, const BitString&) = default;
};

/// Parses a string of '0'/'1' characters.
BitString bits_from_string(std::string_view s);
std::string to_string(const BitString& bits);

std::uint8_t gray(std::uint8_t level) noexcept;
std::uint8_t gray_inverse(std::uint8_t code) noexcept;

/// Per dimension: clamp into [lo, hi], level = round(255 (x - lo) / (hi - lo)),
/// emit gray(level) as 8 bits MSB-first.
BitString gray_encode(std::span<const double> r, const QuantRange& range);
/// Inverse up to quantization: the centre value of each level.
std::vector<double> gray_decode(const BitString& bits, const QuantRange& range);

struct TemplateMeta {
  std::string subject_id;
  std::string key_id;
  double delta = 0.5;
  std::size_t frames = 1;
  QuantRange quant_range;
};

struct CancellableTemplate {
  BitString bits;
  TemplateMeta meta;
};

/// Averages transform_frame over the first F frame pairs and gray-encodes the
/// mean. With no `range` the quantization range is derived from those F
/// projected frames (enrollment); queries pass the enrolled range.
CancellableTemplate make_template(const std::vector<std::vector<double>>& frames_v1,
                                  const std::vector<std::vector<double>>& frames_v2,
                                  const TransformParams& params, std::size_t frames,
                                  const std::optional<QuantRange>& range = std::nullopt,
                                  std::string subject_id = {});

/// Raw Hamming distance between equal-length bit strings.
std::size_t hamming_distance(const BitString& a, const BitString& b);
/// Raw distance divided by bit length.
double normalized_hamming(const BitString& a, const BitString& b);

struct MatchResult {
  double score = 0.0;
  std::size_t raw = 0;
  bool accept = false;
  double threshold = 0.0;
};

/// Accept iff normalized Hamming distance <= threshold. Templates must share
/// bit length, key id and delta.
MatchResult match(const CancellableTemplate& query, const CancellableTemplate& enrolled,
                  double threshold);

/// Template file: "CEEG1", 4-byte big-endian JSON length, JSON meta, packed
/// payload.
std::string serialize_template(const CancellableTemplate& t);
CancellableTemplate deserialize_template(std::string_view bytes);
void write_template(const std::filesystem::path& path, const CancellableTemplate& t);
CancellableTemplate read_template(const std::filesystem::path& path);

}  // namespace neurolock
