#include "neurolock/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "neurolock/error.hpp"
#include "neurolock/rng.hpp"

namespace neurolock {

namespace {

constexpr std::size_t kFixedHeader = 256;
constexpr std::size_t kPerSignalHeader = 256;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// ASCII header field at [offset, offset + width).
std::string field(const std::string& bytes, std::size_t offset, std::size_t width) {
  if (offset + width > bytes.size())
    throw ParseError("EDF header truncated", offset);
  return trim(std::string_view(bytes).substr(offset, width));
}

double number_field(const std::string& bytes, std::size_t offset,
                    std::size_t width) {
  const std::string s = field(bytes, offset, width);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ParseError("EDF header: non-numeric field '" + s + "'", offset);
  return v;
}

long integer_field(const std::string& bytes, std::size_t offset,
                   std::size_t width) {
  const std::string s = field(bytes, offset, width);
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ParseError("EDF header: non-integer field '" + s + "'", offset);
  return v;
}

void put_field(std::string& out, std::string_view value, std::size_t width) {
  std::string s(value.substr(0, width));
  s.resize(width, ' ');
  out += s;
}

// Shortest representation of v that fits in 8 characters, rounded away from
// the data (down for minima, up for maxima) so the range still covers it.
std::string edf_number(double v, bool round_up) {
  for (int digits = 8; digits >= 1; --digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strlen(buf) > 8 || std::strchr(buf, 'e')) continue;
    double parsed = std::strtod(buf, nullptr);
    if ((round_up && parsed < v) || (!round_up && parsed > v)) {
      const double step = std::pow(10.0, std::floor(std::log10(std::fabs(v) + 1e-300)) - digits + 1);
      parsed = round_up ? parsed + step : parsed - step;
      std::snprintf(buf, sizeof buf, "%.*g", digits, parsed);
      if (std::strlen(buf) > 8 || std::strchr(buf, 'e')) continue;
    }
    return buf;
  }
  throw ConfigError("value out of EDF field range");
}

}  // namespace

std::string_view to_string(Protocol p) noexcept {
  switch (p) {
    case Protocol::EO: return "EO";
    case Protocol::EC: return "EC";
    case Protocol::PHY: return "PHY";
    case Protocol::IMA: return "IMA";
    case Protocol::OTHER: return "OTHER";
  }
  return "OTHER";
}

Protocol parse_protocol(std::string_view name) {
  for (Protocol p : {Protocol::EO, Protocol::EC, Protocol::PHY, Protocol::IMA,
                     Protocol::OTHER})
    if (name == to_string(p)) return p;
  throw ConfigError("unknown protocol tag '" + std::string(name) + "'");
}

void validate(const Recording& rec) {
  if (!(rec.fs > 0.0)) throw ConfigError("sampling rate must be positive");
  if (rec.data.rows() < 2) throw ConfigError("recording needs at least 2 channels");
  if (rec.data.cols() < 1) throw ConfigError("recording has no samples");
  if (rec.channels.size() != rec.data.rows())
    throw ConfigError("channel label count does not match data rows");
}

// ---------------------------------------------------------------------------
// EDF

Recording read_edf(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < kFixedHeader) throw ParseError("EDF header truncated", bytes.size());
  if (field(bytes, 0, 8) != "0") throw ParseError("EDF version field is not '0'", 0);

  const long header_bytes = integer_field(bytes, 184, 8);
  long n_records = integer_field(bytes, 236, 8);
  const double record_duration = number_field(bytes, 244, 8);
  const long ns = integer_field(bytes, 252, 4);
  if (ns < 1) throw ParseError("EDF declares no signals", 252);
  const std::size_t expected_header = kFixedHeader + kPerSignalHeader * static_cast<std::size_t>(ns);
  if (header_bytes < 0 || static_cast<std::size_t>(header_bytes) != expected_header)
    throw ParseError("EDF header length field " + std::to_string(header_bytes) +
                         " disagrees with " + std::to_string(expected_header) +
                         " bytes implied by the signal count",
                     184);
  if (bytes.size() < expected_header)
    throw ParseError("EDF signal headers truncated", bytes.size());
  if (!(record_duration > 0.0)) throw ParseError("EDF record duration must be positive", 244);

  struct Signal {
    std::string label;
    double phys_min, phys_max, dig_min, dig_max;
    long samples;
  };
  const auto n = static_cast<std::size_t>(ns);
  std::vector<Signal> sig(n);
  // Signal header fields are stored field-major: all labels, then all
  // transducers, and so on.
  std::size_t off = kFixedHeader;
  for (std::size_t i = 0; i < n; ++i) sig[i].label = field(bytes, off + 16 * i, 16);
  off += 16 * n;
  off += 80 * n;  // transducer
  off += 8 * n;   // physical dimension
  for (std::size_t i = 0; i < n; ++i) sig[i].phys_min = number_field(bytes, off + 8 * i, 8);
  off += 8 * n;
  for (std::size_t i = 0; i < n; ++i) sig[i].phys_max = number_field(bytes, off + 8 * i, 8);
  off += 8 * n;
  for (std::size_t i = 0; i < n; ++i) sig[i].dig_min = number_field(bytes, off + 8 * i, 8);
  off += 8 * n;
  for (std::size_t i = 0; i < n; ++i) sig[i].dig_max = number_field(bytes, off + 8 * i, 8);
  off += 8 * n;
  off += 80 * n;  // prefiltering
  for (std::size_t i = 0; i < n; ++i) {
    sig[i].samples = integer_field(bytes, off + 8 * i, 8);
    if (sig[i].samples < 1)
      throw ParseError("EDF signal with non-positive samples per record", off + 8 * i);
  }
  const std::size_t samples_field = off;

  std::size_t record_bytes = 0;
  for (const auto& s : sig) record_bytes += 2 * static_cast<std::size_t>(s.samples);
  const std::size_t payload = bytes.size() - expected_header;
  if (n_records == -1) n_records = static_cast<long>(payload / record_bytes);
  if (n_records < 0) throw ParseError("EDF negative record count", 236);
  if (n_records == 0) throw EmptyRecording("EDF file has zero data records");
  if (payload != record_bytes * static_cast<std::size_t>(n_records))
    throw ParseError("EDF data size " + std::to_string(payload) +
                         " inconsistent with " + std::to_string(n_records) +
                         " records of " + std::to_string(record_bytes) + " bytes",
                     expected_header);

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i)
    if (sig[i].label != "EDF Annotations") keep.push_back(i);
  if (keep.empty()) throw EmptyRecording("EDF file has only annotation signals");
  const long spr = sig[keep.front()].samples;
  for (std::size_t i : keep)
    if (sig[i].samples != spr)
      throw ParseError("EDF signals with differing sampling rates are not supported",
                       samples_field + 8 * i);
  for (std::size_t i : keep)
    if (sig[i].dig_max <= sig[i].dig_min)
      throw ParseError("EDF digital range is empty for signal '" + sig[i].label + "'");

  Recording rec;
  rec.fs = static_cast<double>(spr) / record_duration;
  rec.data = RowMatrix(keep.size(), static_cast<std::size_t>(spr * n_records));
  for (std::size_t i : keep) rec.channels.push_back(sig[i].label);

  std::vector<std::size_t> signal_offset(n);
  std::size_t acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    signal_offset[i] = acc;
    acc += 2 * static_cast<std::size_t>(sig[i].samples);
  }
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data()) + expected_header;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const Signal& s = sig[keep[k]];
    const double gain = (s.phys_max - s.phys_min) / (s.dig_max - s.dig_min);
    auto row = rec.data.row(k);
    for (long r = 0; r < n_records; ++r) {
      const unsigned char* p = raw + static_cast<std::size_t>(r) * record_bytes + signal_offset[keep[k]];
      for (long j = 0; j < spr; ++j) {
        const auto digital = static_cast<std::int16_t>(
            static_cast<std::uint16_t>(p[2 * j]) | (static_cast<std::uint16_t>(p[2 * j + 1]) << 8));
        row[static_cast<std::size_t>(r * spr + j)] =
            s.phys_min + (static_cast<double>(digital) - s.dig_min) * gain;
      }
    }
  }
  std::string patient = field(bytes, 8, 80);
  rec.subject_id = patient.empty() ? path.stem().string() : patient;
  return rec;
}

void write_edf(const std::filesystem::path& path, const Recording& rec) {
  validate(rec);
  const std::size_t n = rec.channel_count();
  const std::size_t total = rec.sample_count();
  std::size_t spr = total;
  double duration = static_cast<double>(total) / rec.fs;
  const double rounded_fs = std::round(rec.fs);
  if (rounded_fs == rec.fs && total % static_cast<std::size_t>(rounded_fs) == 0) {
    spr = static_cast<std::size_t>(rounded_fs);
    duration = 1.0;
  }
  if (spr > 99999999) throw ConfigError("EDF record too long");
  const std::size_t n_records = total / spr;
  constexpr double dig_min = -32768.0, dig_max = 32767.0;

  std::vector<std::string> pmin_s(n), pmax_s(n);
  std::vector<double> pmin(n), pmax(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = rec.data.row(i);
    double lo = *std::min_element(row.begin(), row.end());
    double hi = *std::max_element(row.begin(), row.end());
    if (hi - lo < 1e-6) {
      lo -= 1.0;
      hi += 1.0;
    }
    pmin_s[i] = edf_number(lo, false);
    pmax_s[i] = edf_number(hi, true);
    pmin[i] = std::strtod(pmin_s[i].c_str(), nullptr);
    pmax[i] = std::strtod(pmax_s[i].c_str(), nullptr);
  }

  std::string out;
  const std::size_t header_bytes = kFixedHeader + kPerSignalHeader * n;
  out.reserve(header_bytes + 2 * n * total);
  put_field(out, "0", 8);
  put_field(out, rec.subject_id, 80);
  put_field(out, std::string("Startdate X X X X protocol ") + std::string(to_string(rec.protocol)), 80);
  put_field(out, "01.01.00", 8);
  put_field(out, "00.00.00", 8);
  put_field(out, std::to_string(header_bytes), 8);
  put_field(out, "", 44);
  put_field(out, std::to_string(n_records), 8);
  put_field(out, edf_number(duration, true), 8);
  put_field(out, std::to_string(n), 4);
  for (std::size_t i = 0; i < n; ++i) put_field(out, rec.channels[i], 16);
  for (std::size_t i = 0; i < n; ++i) put_field(out, "", 80);
  for (std::size_t i = 0; i < n; ++i) put_field(out, "uV", 8);
  for (std::size_t i = 0; i < n; ++i) put_field(out, pmin_s[i], 8);
  for (std::size_t i = 0; i < n; ++i) put_field(out, pmax_s[i], 8);
  for (std::size_t i = 0; i < n; ++i) put_field(out, "-32768", 8);
  for (std::size_t i = 0; i < n; ++i) put_field(out, "32767", 8);
  for (std::size_t i = 0; i < n; ++i) put_field(out, "", 80);
  for (std::size_t i = 0; i < n; ++i) put_field(out, std::to_string(spr), 8);
  for (std::size_t i = 0; i < n; ++i) put_field(out, "", 32);

  for (std::size_t r = 0; r < n_records; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const double scale = (dig_max - dig_min) / (pmax[i] - pmin[i]);
      auto row = rec.data.row(i);
      for (std::size_t j = 0; j < spr; ++j) {
        double d = std::round(dig_min + (row[r * spr + j] - pmin[i]) * scale);
        d = std::clamp(d, dig_min, dig_max);
        const auto v = static_cast<std::uint16_t>(static_cast<std::int16_t>(d));
        out.push_back(static_cast<char>(v & 0xff));
        out.push_back(static_cast<char>(v >> 8));
      }
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

// ---------------------------------------------------------------------------
// CSV

Recording parse_csv_matrix(std::string_view text, double fs, Protocol protocol) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    std::vector<double> values;
    std::size_t col = 0;
    std::size_t cpos = 0;
    while (true) {
      std::size_t cend = line.find(',', cpos);
      if (cend == std::string_view::npos) cend = line.size();
      const std::string cell = trim(line.substr(cpos, cend - cpos));
      ++col;
      double v = 0.0;
      const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || p != cell.data() + cell.size())
        throw ParseError("non-numeric CSV cell '" + cell + "' at row " +
                             std::to_string(line_no) + ", column " + std::to_string(col),
                         ParseError::npos, line_no, col);
      values.push_back(v);
      if (cend == line.size()) break;
      cpos = cend + 1;
    }
    if (!rows.empty() && values.size() != rows.front().size())
      throw ParseError("ragged CSV: row " + std::to_string(line_no) + " has " +
                           std::to_string(values.size()) + " columns, expected " +
                           std::to_string(rows.front().size()),
                       ParseError::npos, line_no);
    rows.push_back(std::move(values));
    if (pos > text.size()) break;
  }
  if (rows.empty()) throw EmptyRecording("CSV matrix is empty");

  Recording rec;
  rec.fs = fs;
  rec.protocol = protocol;
  rec.data = RowMatrix(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy(rows[r].begin(), rows[r].end(), rec.data.row(r).begin());
    rec.channels.push_back("ch" + std::to_string(r));
  }
  validate(rec);
  return rec;
}

Recording read_csv_matrix(const std::filesystem::path& path, double fs,
                          Protocol protocol) {
  Recording rec = parse_csv_matrix(read_file(path), fs, protocol);
  rec.subject_id = path.stem().string();
  return rec;
}

void write_csv_matrix(const std::filesystem::path& path, const Recording& rec) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  char buf[64];
  for (std::size_t r = 0; r < rec.data.rows(); ++r) {
    auto row = rec.data.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof buf, row[c]);
      if (c) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic generator

SyntheticSpec synthetic_spec_from_json(std::string_view json_text) {
  SyntheticSpec spec;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  try {
    spec.n_subjects = j.value("n_subjects", spec.n_subjects);
    spec.n_channels = j.value("n_channels", spec.n_channels);
    spec.duration_s = j.value("duration_s", spec.duration_s);
    spec.fs = j.value("fs", spec.fs);
    spec.master_seed = j.value("master_seed", spec.master_seed);
    spec.n_sources = j.value("n_sources", spec.n_sources);
    spec.noise_level = j.value("noise_level", spec.noise_level);
    spec.phase_jitter = j.value("phase_jitter", spec.phase_jitter);
    spec.protocol_shift = j.value("protocol_shift", spec.protocol_shift);
    spec.identical_channels = j.value("identical_channels", spec.identical_channels);
    if (j.contains("protocols")) {
      spec.protocols.clear();
      for (const auto& p : j.at("protocols")) spec.protocols.push_back(parse_protocol(p.get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  return spec;
}

std::string synthetic_spec_to_json(const SyntheticSpec& spec) {
  nlohmann::json j;
  j["n_subjects"] = spec.n_subjects;
  j["n_channels"] = spec.n_channels;
  j["duration_s"] = spec.duration_s;
  j["fs"] = spec.fs;
  j["master_seed"] = spec.master_seed;
  j["n_sources"] = spec.n_sources;
  j["noise_level"] = spec.noise_level;
  j["phase_jitter"] = spec.phase_jitter;
  j["protocol_shift"] = spec.protocol_shift;
  j["identical_channels"] = spec.identical_channels;
  j["protocols"] = nlohmann::json::array();
  for (Protocol p : spec.protocols) j["protocols"].push_back(std::string(to_string(p)));
  return j.dump(2);
}

namespace {

void check_spec(const SyntheticSpec& spec) {
  if (spec.n_channels < 2) throw ConfigError("synthetic spec: n_channels must be >= 2");
  if (spec.n_sources < 1) throw ConfigError("synthetic spec: n_sources must be >= 1");
  if (!(spec.fs > 0.0)) throw ConfigError("synthetic spec: fs must be positive");
  if (!(spec.duration_s > 0.0)) throw ConfigError("synthetic spec: duration_s must be positive");
  if (spec.noise_level < 0.0 || spec.phase_jitter < 0.0 || spec.protocol_shift < 0.0)
    throw ConfigError("synthetic spec: noise, jitter and shift must be non-negative");
  if (std::llround(spec.duration_s * spec.fs) < 1)
    throw ConfigError("synthetic spec: recording would have no samples");
}

struct SubjectLatent {
  std::vector<double> freq_hz;   // per source
  RowMatrix weights;             // channels x sources, non-negative
  RowMatrix lag;                 // channels x sources, radians
  double alpha_amp;
};

std::size_t protocol_index(Protocol p) { return static_cast<std::size_t>(p); }

SubjectLatent subject_latent(const SyntheticSpec& spec, std::size_t subject,
                             Protocol protocol) {
  const std::size_t n = spec.n_channels, k = spec.n_sources;
  Rng rng(spec.master_seed, "synth.subject", subject);
  SubjectLatent lat;
  lat.freq_hz.resize(k);
  // Frequencies sit on a 0.5 Hz grid so every 2 s frame holds whole beat
  // cycles between sources; otherwise the beat phase dominates frame-to-frame
  // variation of the coupling estimates.
  for (auto& f : lat.freq_hz) f = 14.0 + 0.5 * static_cast<double>(rng.below(29));
  lat.weights = RowMatrix(n, k);
  lat.lag = RowMatrix(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < k; ++s) {
      const double u = rng.uniform();
      lat.weights(i, s) = u * u * u;
      lat.lag(i, s) = rng.uniform(-0.6, 0.6);
    }
  }
  lat.alpha_amp = rng.uniform(0.5, 1.5);

  Rng prot(spec.master_seed, "synth.protocol", subject, protocol_index(protocol));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t s = 0; s < k; ++s)
      lat.weights(i, s) *= std::max(0.0, 1.0 + spec.protocol_shift * prot.uniform(-1.0, 1.0));

  if (spec.identical_channels) {
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t s = 0; s < k; ++s) lat.weights(i, s) = lat.weights(0, s);
    std::fill(lat.lag.values().begin(), lat.lag.values().end(), 0.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t s = 0; s < k; ++s) sum += lat.weights(i, s);
    if (sum <= 0.0) {
      lat.weights(i, 0) = 1.0;
      sum = 1.0;
    }
    for (std::size_t s = 0; s < k; ++s) lat.weights(i, s) /= sum;
  }
  return lat;
}

}  // namespace

RowMatrix subject_coupling(const SyntheticSpec& spec, std::size_t subject,
                           Protocol protocol) {
  check_spec(spec);
  const SubjectLatent lat = subject_latent(spec, subject, protocol);
  const std::size_t n = spec.n_channels;
  RowMatrix c(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double dot = 0.0, ni = 0.0, nj = 0.0;
      for (std::size_t s = 0; s < spec.n_sources; ++s) {
        dot += lat.weights(i, s) * lat.weights(j, s);
        ni += lat.weights(i, s) * lat.weights(i, s);
        nj += lat.weights(j, s) * lat.weights(j, s);
      }
      const double v = std::clamp(dot / std::sqrt(ni * nj), 0.0, 1.0);
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

Recording synthesize_one(const SyntheticSpec& spec, std::size_t subject,
                         Protocol protocol) {
  check_spec(spec);
  const SubjectLatent lat = subject_latent(spec, subject, protocol);
  const std::size_t n = spec.n_channels, k = spec.n_sources;
  const auto samples = static_cast<std::size_t>(std::llround(spec.duration_s * spec.fs));
  constexpr double two_pi = 2.0 * std::numbers::pi;
  constexpr double microvolts = 10.0;

  Recording rec;
  rec.fs = spec.fs;
  rec.protocol = protocol;
  rec.subject_id = "S" + std::to_string(subject + 1);
  for (std::size_t i = 0; i < n; ++i) rec.channels.push_back("ch" + std::to_string(i));
  rec.data = RowMatrix(n, samples);

  Rng osc(spec.master_seed, "synth.oscillator", subject, protocol_index(protocol));
  std::vector<double> phase(k);
  for (auto& p : phase) p = osc.uniform(0.0, two_pi);
  const double alpha_gain = protocol == Protocol::EC ? 2.0 * lat.alpha_amp : 0.5 * lat.alpha_amp;
  double alpha_phase = osc.uniform(0.0, two_pi);
  for (std::size_t t = 0; t < samples; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      double x = 0.0;
      for (std::size_t s = 0; s < k; ++s)
        x += lat.weights(i, s) * std::cos(phase[s] + lat.lag(i, s));
      x += alpha_gain * 0.2 * std::cos(alpha_phase + 0.1 * static_cast<double>(i));
      rec.data(i, t) = microvolts * x;
    }
    for (std::size_t s = 0; s < k; ++s)
      phase[s] = std::remainder(phase[s] + two_pi * lat.freq_hz[s] / spec.fs +
                                    spec.phase_jitter * osc.normal(),
                                two_pi);
    alpha_phase = std::remainder(alpha_phase + two_pi * 10.0 / spec.fs + 0.02 * osc.normal(), two_pi);
  }

  if (spec.noise_level > 0.0) {
    // Kellet's pink-noise filter bank; output std is roughly 1 for unit
    // white input after the 0.11 scale.
    for (std::size_t i = 0; i < n; ++i) {
      Rng noise(spec.master_seed, "synth.noise", subject, protocol_index(protocol), i);
      double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
      auto row = rec.data.row(i);
      for (std::size_t t = 0; t < samples; ++t) {
        const double w = noise.normal();
        b0 = 0.99886 * b0 + w * 0.0555179;
        b1 = 0.99332 * b1 + w * 0.0750759;
        b2 = 0.96900 * b2 + w * 0.1538520;
        b3 = 0.86650 * b3 + w * 0.3104856;
        b4 = 0.55000 * b4 + w * 0.5329522;
        b5 = -0.7616 * b5 - w * 0.0168980;
        const double pink = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
        b6 = w * 0.115926;
        row[t] += microvolts * spec.noise_level * 0.11 * pink;
      }
    }
  }
  return rec;
}

std::vector<Recording> synthesize(const SyntheticSpec& spec) {
  check_spec(spec);
  std::vector<Recording> out;
  out.reserve(spec.n_subjects * spec.protocols.size());
  for (std::size_t s = 0; s < spec.n_subjects; ++s)
    for (Protocol p : spec.protocols) out.push_back(synthesize_one(spec, s, p));
  return out;
}

}  // namespace neurolock
