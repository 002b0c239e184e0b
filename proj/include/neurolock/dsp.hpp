#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "neurolock/ingest.hpp"
#include "neurolock/matrix.hpp"

namespace neurolock {

/// Fixed-length, non-overlapping (by default) window of a recording.
struct Frame {
  RowMatrix data;  // channels x samples
  std::string subject_id;
  Protocol protocol = Protocol::OTHER;
  std::size_t frame_index = 0;
};

/// Instantaneous phase of every channel, radians in (-pi, pi].
struct PhaseFrame {
  RowMatrix phase;
  std::string subject_id;
  Protocol protocol = Protocol::OTHER;
  std::size_t frame_index = 0;
};

/// Linear-phase FIR band-pass.
struct FirFilter {
  std::vector<double> taps;  // order + 1 symmetric taps
  double fs = 0.0;
  double low_hz = 0.0;
  double high_hz = 0.0;

  std::size_t order() const noexcept { return taps.empty() ? 0 : taps.size() - 1; }
  /// Hamming main-lobe width, 3.3 * fs / order. The response is within
  /// -6 dB over [low + tw, high - tw] and below -40 dB outside
  /// [low - tw, high + tw].
  double transition_width() const noexcept {
    return 3.3 * fs / static_cast<double>(order());
  }
};

struct DspConfig {
  double prefilter_low = 0.5;
  double prefilter_high = 42.0;
  double band_low = 13.0;
  double band_high = 30.0;
  double frame_seconds = 2.0;
  double overlap = 0.0;
  std::size_t fir_order = 330;
};

/// Removes the least-squares line from every channel.
Recording detrend(const Recording& rec);
void detrend_in_place(std::span<double> x);

/// Hamming-windowed sinc band-pass, normalized to unit gain at the band
/// centre.
FirFilter design_bandpass(double fs, double low_hz, double high_hz, std::size_t order);

/// Complex frequency response H(f) of a single pass.
std::complex<double> frequency_response(const FirFilter& filter, double f_hz);

/// Forward-backward application; the effective magnitude response is
/// |H(f)|^2 and the phase response is zero. Needs > 3 * order samples.
Recording filter_zero_phase(const Recording& rec, const FirFilter& filter);
std::vector<double> filter_zero_phase(std::span<const double> x, const FirFilter& filter);

/// Number of frames: floor((samples - L) / step) + 1 with
/// step = round(L * (1 - overlap)); 0 when samples < L.
std::size_t frame_count(std::size_t samples, std::size_t frame_len, double overlap);
std::vector<Frame> frame(const Recording& rec, double frame_seconds, double overlap = 0.0);

/// Analytic-signal phase over the whole frame via the DFT.
PhaseFrame instantaneous_phase(const Frame& frame);
std::vector<double> instantaneous_phase(std::span<const double> x);

/// Frames from both filter stages of one recording: the broadband
/// (prefiltered) frames feed the baseline features, the beta-band frames
/// feed the connectivity graph.
struct PreprocessedRecording {
  std::vector<Frame> broadband;
  std::vector<Frame> band;
};
PreprocessedRecording preprocess(const Recording& rec, const DspConfig& cfg);

}  // namespace neurolock
