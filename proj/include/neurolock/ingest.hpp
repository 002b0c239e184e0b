#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "neurolock/matrix.hpp"

namespace neurolock {

/// Elicitation protocol under which a recording was acquired.
enum class Protocol { EO, EC, PHY, IMA, OTHER };

std::string_view to_string(Protocol p) noexcept;
/// Throws ConfigError for unknown names.
Protocol parse_protocol(std::string_view name);

/// Multi-channel timeseries, channels x samples, in microvolts.
struct Recording {
  std::vector<std::string> channels;
  double fs = 0.0;
  RowMatrix data;
  Protocol protocol = Protocol::OTHER;
  std::string subject_id;

  std::size_t channel_count() const noexcept { return data.rows(); }
  std::size_t sample_count() const noexcept { return data.cols(); }
  double duration_s() const noexcept {
    return static_cast<double>(sample_count()) / fs;
  }
};

/// Throws ConfigError unless: N >= 2, every row has >= 1 sample, fs > 0 and
/// the label list matches the channel count.
void validate(const Recording& rec);

// EDF (continuous, 16-bit). Annotation signals are dropped; all remaining
// signals must share one sampling rate.
Recording read_edf(const std::filesystem::path& path);
/// Writes a 16-bit EDF with one-second records. The physical range of every
/// signal is its data min/max (widened if flat).
void write_edf(const std::filesystem::path& path, const Recording& rec);

/// Numeric CSV, one row per channel. Channel labels become "ch0", "ch1", ...
Recording read_csv_matrix(const std::filesystem::path& path, double fs,
                          Protocol protocol);
Recording parse_csv_matrix(std::string_view text, double fs, Protocol protocol);
/// Writes with max_digits10 precision so reading back is exact.
void write_csv_matrix(const std::filesystem::path& path, const Recording& rec);

/// Desk-scale synthetic EEG: narrow-band beta oscillators mixed into
/// channels through a subject-specific, protocol-perturbed weight matrix,
/// plus 1/f noise.
struct SyntheticSpec {
  std::size_t n_subjects = 20;
  std::size_t n_channels = 32;
  double duration_s = 60.0;
  double fs = 160.0;
  std::uint64_t master_seed = 1;
  std::size_t n_sources = 4;
  /// Standard deviation of the pink noise relative to unit oscillator
  /// amplitude.
  double noise_level = 0.1;
  /// Per-sample phase diffusion of each oscillator, in radians.
  double phase_jitter = 0.001;
  /// Relative perturbation of the mixing weights between protocols.
  double protocol_shift = 0.25;
  /// Every channel receives the same oscillator mixture with zero phase
  /// offset (used for the perfect-coupling check).
  bool identical_channels = false;
  std::vector<Protocol> protocols{Protocol::EO, Protocol::EC};
};

/// Parses the JSON schema documented in docs/formats.md; missing keys keep
/// their defaults.
SyntheticSpec synthetic_spec_from_json(std::string_view json_text);
std::string synthetic_spec_to_json(const SyntheticSpec& spec);

/// Channel x channel coupling matrix for a subject: cosine similarity of the
/// channels' non-negative mixing weights. Symmetric, entries in [0, 1].
RowMatrix subject_coupling(const SyntheticSpec& spec, std::size_t subject,
                           Protocol protocol);

/// One recording for a single (subject, protocol). Independent of the order
/// in which subjects are generated.
Recording synthesize_one(const SyntheticSpec& spec, std::size_t subject,
                         Protocol protocol);

/// All subjects, ordered subject-major then by spec.protocols.
std::vector<Recording> synthesize(const SyntheticSpec& spec);

}  // namespace neurolock
