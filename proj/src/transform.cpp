#include "neurolock/transform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "neurolock/error.hpp"
#include "neurolock/io.hpp"
#include "neurolock/rng.hpp"

namespace neurolock {

std::string key_id(std::uint64_t user_key) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(mix64(derive_seed(user_key, "transform.key-id"))));
  return buf;
}

std::size_t projected_dim(std::size_t dim, double delta) {
  return static_cast<std::size_t>(std::llround(delta * static_cast<double>(dim)));
}

TransformParams derive_params(std::uint64_t user_key, std::size_t dim, double delta,
                              ProjectionDistribution dist) {
  if (dim < 2) throw ConfigError("transform: dim must be >= 2");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("transform: delta must be in (0, 1)");
  const std::size_t cols = projected_dim(dim, delta);
  if (cols < 1 || cols >= dim)
    throw ConfigError("transform: round(delta * dim) must be in [1, dim)");

  TransformParams p;
  p.user_key = user_key;
  p.dim = dim;
  p.delta = delta;
  Rng perm_rng(user_key, "transform.permutation");
  p.permutation = perm_rng.permutation(dim);
  Rng proj_rng(user_key, "transform.projection");
  p.projection = RowMatrix(dim, cols);
  for (double& m : p.projection.values())
    m = dist == ProjectionDistribution::Uniform ? proj_rng.uniform() : proj_rng.normal();
  return p;
}

TransformParams params_from_literals(const std::vector<std::size_t>& permutation_1based,
                                     const RowMatrix& projection, std::uint64_t user_key) {
  const std::size_t dim = permutation_1based.size();
  if (projection.rows() != dim) throw ShapeError("projection rows must equal permutation length");
  std::vector<bool> seen(dim, false);
  TransformParams p;
  p.user_key = user_key;
  p.dim = dim;
  p.delta = static_cast<double>(projection.cols()) / static_cast<double>(dim);
  for (std::size_t v : permutation_1based) {
    if (v < 1 || v > dim || seen[v - 1]) throw ShapeError("not a permutation of 1..dim");
    seen[v - 1] = true;
    p.permutation.push_back(v - 1);
  }
  p.projection = projection;
  return p;
}

std::vector<double> combine(std::span<const double> v1, std::span<const double> v2,
                            const TransformParams& params) {
  if (v1.size() != params.dim || v2.size() != params.dim)
    throw ShapeError("combine: feature length " + std::to_string(v1.size()) + "/" +
                     std::to_string(v2.size()) + " does not match transform dim " +
                     std::to_string(params.dim));
  std::vector<double> c(params.dim);
  for (std::size_t i = 0; i < params.dim; ++i) c[i] = v1[params.permutation[i]] * v2[i];
  return c;
}

std::vector<double> project(std::span<const double> c, const TransformParams& params) {
  const auto& m = params.projection;
  if (c.size() != m.rows()) throw ShapeError("project: vector length does not match rows of M");
  std::vector<double> r(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) r[j] += c[i] * row[j];
  }
  return r;
}

std::vector<double> transform_frame(std::span<const double> v1, std::span<const double> v2,
                                    const TransformParams& params) {
  return project(combine(v1, v2, params), params);
}

QuantRange range_from_vectors(const std::vector<std::vector<double>>& vectors, double margin) {
  if (vectors.empty()) throw ConfigError("quantization range needs at least one vector");
  const std::size_t d = vectors.front().size();
  QuantRange q{std::vector<double>(d), std::vector<double>(d)};
  for (std::size_t j = 0; j < d; ++j) {
    double lo = vectors.front()[j], hi = lo;
    for (const auto& v : vectors) {
      if (v.size() != d) throw ShapeError("quantization range: ragged vectors");
      lo = std::min(lo, v[j]);
      hi = std::max(hi, v[j]);
    }
    const double span = hi - lo;
    const double mid = 0.5 * (lo + hi);
    if (span <= 1e-12 * std::max(1.0, std::fabs(mid))) {
      const double half = margin * std::max(std::fabs(mid), 1e-6);
      q.lo[j] = mid - half;
      q.hi[j] = mid + half;
    } else {
      q.lo[j] = lo - margin * span;
      q.hi[j] = hi + margin * span;
    }
  }
  return q;
}

BitString bits_from_string(std::string_view s) {
  BitString b;
  b.bit_count = s.size();
  b.bytes.assign((s.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1')
      b.bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    else if (s[i] != '0')
      throw ParseError("bit string may only contain '0' and '1'");
  }
  return b;
}

std::string to_string(const BitString& bits) {
  std::string s(bits.bit_count, '0');
  for (std::size_t i = 0; i < bits.bit_count; ++i)
    if (bits.bit(i)) s[i] = '1';
  return s;
}

std::uint8_t gray(std::uint8_t level) noexcept {
  return static_cast<std::uint8_t>(level ^ (level >> 1));
}

std::uint8_t gray_inverse(std::uint8_t code) noexcept {
  std::uint8_t v = code;
  for (std::uint8_t shift = code >> 1; shift; shift >>= 1) v ^= shift;
  return v;
}

namespace {
void check_range(const QuantRange& range, std::size_t dims) {
  if (range.lo.size() != dims || range.hi.size() != dims)
    throw ShapeError("quantization range has " + std::to_string(range.lo.size()) +
                     " dimensions, expected " + std::to_string(dims));
  for (std::size_t j = 0; j < dims; ++j)
    if (!(range.lo[j] < range.hi[j])) throw ConfigError("quantization range needs lo < hi");
}
}  // namespace

BitString gray_encode(std::span<const double> r, const QuantRange& range) {
  check_range(range, r.size());
  BitString b;
  b.bit_count = 8 * r.size();
  b.bytes.resize(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) {
    const double x = std::clamp(r[j], range.lo[j], range.hi[j]);
    const double level = std::round(255.0 * (x - range.lo[j]) / (range.hi[j] - range.lo[j]));
    b.bytes[j] = gray(static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0)));
  }
  return b;
}

std::vector<double> gray_decode(const BitString& bits, const QuantRange& range) {
  if (bits.bit_count % 8 != 0) throw ShapeError("gray_decode: bit length not divisible by 8");
  const std::size_t dims = bits.bit_count / 8;
  check_range(range, dims);
  std::vector<double> r(dims);
  for (std::size_t j = 0; j < dims; ++j) {
    const double level = gray_inverse(bits.bytes[j]);
    r[j] = range.lo[j] + level * (range.hi[j] - range.lo[j]) / 255.0;
  }
  return r;
}

CancellableTemplate make_template(const std::vector<std::vector<double>>& frames_v1,
                                  const std::vector<std::vector<double>>& frames_v2,
                                  const TransformParams& params, std::size_t frames,
                                  const std::optional<QuantRange>& range,
                                  std::string subject_id) {
  if (frames < 1) throw ConfigError("template needs at least one frame");
  if (frames > frames_v1.size() || frames > frames_v2.size())
    throw ConfigError("template requests " + std::to_string(frames) + " frames but only " +
                      std::to_string(std::min(frames_v1.size(), frames_v2.size())) +
                      " are available");
  std::vector<std::vector<double>> projected;
  projected.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f)
    projected.push_back(transform_frame(frames_v1[f], frames_v2[f], params));
  std::vector<double> mean(params.output_dim(), 0.0);
  for (const auto& r : projected)
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += r[j];
  for (double& m : mean) m /= static_cast<double>(frames);

  CancellableTemplate t;
  t.meta.subject_id = std::move(subject_id);
  t.meta.key_id = key_id(params.user_key);
  t.meta.delta = params.delta;
  t.meta.frames = frames;
  t.meta.quant_range = range ? *range : range_from_vectors(projected);
  t.bits = gray_encode(mean, t.meta.quant_range);
  return t;
}

std::size_t hamming_distance(const BitString& a, const BitString& b) {
  if (a.bit_count != b.bit_count || a.bytes.size() != b.bytes.size())
    throw IncompatibleTemplates("bit strings differ in length");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.bytes.size(); ++i)
    d += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(a.bytes[i] ^ b.bytes[i])));
  return d;
}

double normalized_hamming(const BitString& a, const BitString& b) {
  if (a.bit_count == 0) throw IncompatibleTemplates("empty bit strings");
  return static_cast<double>(hamming_distance(a, b)) / static_cast<double>(a.bit_count);
}

MatchResult match(const CancellableTemplate& query, const CancellableTemplate& enrolled,
                  double threshold) {
  if (query.bits.bit_count != enrolled.bits.bit_count)
    throw IncompatibleTemplates("template bit lengths differ");
  if (query.meta.key_id != enrolled.meta.key_id)
    throw IncompatibleTemplates("templates were made with different keys");
  if (query.meta.delta != enrolled.meta.delta)
    throw IncompatibleTemplates("templates were made with different delta");
  MatchResult m;
  m.raw = hamming_distance(query.bits, enrolled.bits);
  m.score = static_cast<double>(m.raw) / static_cast<double>(query.bits.bit_count);
  m.threshold = threshold;
  m.accept = m.score <= threshold;
  return m;
}

std::string serialize_template(const CancellableTemplate& t) {
  nlohmann::json j;
  j["format"] = "CEEG1";
  j["bits"] = t.bits.bit_count;
  j["subject_id"] = t.meta.subject_id;
  j["key_id"] = t.meta.key_id;
  j["delta"] = t.meta.delta;
  j["frames"] = t.meta.frames;
  j["quant_range"] = {{"lo", t.meta.quant_range.lo}, {"hi", t.meta.quant_range.hi}};
  const std::string meta = j.dump();
  std::string out = "CEEG1";
  const auto len = static_cast<std::uint32_t>(meta.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((len >> shift) & 0xff));
  out += meta;
  out.append(reinterpret_cast<const char*>(t.bits.bytes.data()), t.bits.bytes.size());
  return out;
}

CancellableTemplate deserialize_template(std::string_view bytes) {
  if (bytes.size() < 9 || bytes.substr(0, 5) != "CEEG1")
    throw ParseError("not a CEEG1 template (bad magic)", 0);
  std::uint32_t len = 0;
  for (std::size_t i = 5; i < 9; ++i) len = (len << 8) | static_cast<std::uint8_t>(bytes[i]);
  if (9 + static_cast<std::size_t>(len) > bytes.size())
    throw ParseError("template meta block truncated", 5);
  CancellableTemplate t;
  try {
    const auto j = nlohmann::json::parse(bytes.substr(9, len));
    t.bits.bit_count = j.at("bits").get<std::size_t>();
    t.meta.subject_id = j.at("subject_id").get<std::string>();
    t.meta.key_id = j.at("key_id").get<std::string>();
    t.meta.delta = j.at("delta").get<double>();
    t.meta.frames = j.at("frames").get<std::size_t>();
    t.meta.quant_range.lo = j.at("quant_range").at("lo").get<std::vector<double>>();
    t.meta.quant_range.hi = j.at("quant_range").at("hi").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("template meta: ") + e.what(), 9);
  }
  if (t.bits.bit_count % 8 != 0) throw ParseError("template bit count not divisible by 8", 9);
  if (t.meta.frames < 1) throw ParseError("template frame count must be >= 1", 9);
  const std::size_t payload = t.bits.bit_count / 8;
  const std::size_t offset = 9 + len;
  if (bytes.size() != offset + payload)
    throw ParseError("template payload has " + std::to_string(bytes.size() - offset) +
                         " bytes, expected " + std::to_string(payload),
                     offset);
  t.bits.bytes.assign(reinterpret_cast<const std::uint8_t*>(bytes.data()) + offset,
                      reinterpret_cast<const std::uint8_t*>(bytes.data()) + offset + payload);
  return t;
}

void write_template(const std::filesystem::path& path, const CancellableTemplate& t) {
  write_file_atomic(path, serialize_template(t));
}

CancellableTemplate read_template(const std::filesystem::path& path) {
  return deserialize_template(read_file_bytes(path));
}

}  // namespace neurolock
