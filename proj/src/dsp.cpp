#include "neurolock/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "neurolock/error.hpp"
#include "neurolock/fft.hpp"

namespace neurolock {

namespace {
constexpr double kPi = std::numbers::pi;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}
}  // namespace

void detrend_in_place(std::span<double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw LengthError("detrend needs at least 2 samples per channel");
  const double t_mean = 0.5 * static_cast<double>(n - 1);
  double x_mean = 0.0;
  for (double v : x) x_mean += v;
  x_mean /= static_cast<double>(n);
  double sxt = 0.0, stt = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double dt = static_cast<double>(t) - t_mean;
    sxt += dt * (x[t] - x_mean);
    stt += dt * dt;
  }
  const double slope = sxt / stt;
  for (std::size_t t = 0; t < n; ++t)
    x[t] -= x_mean + slope * (static_cast<double>(t) - t_mean);
}

Recording detrend(const Recording& rec) {
  Recording out = rec;
  for (std::size_t c = 0; c < out.data.rows(); ++c) detrend_in_place(out.data.row(c));
  return out;
}

FirFilter design_bandpass(double fs, double low_hz, double high_hz, std::size_t order) {
  if (!(fs > 0.0)) throw ConfigError("band-pass: fs must be positive");
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < fs / 2.0))
    throw ConfigError("band-pass: need 0 < low < high < fs/2");
  if (order < 2 || order % 2 != 0) throw ConfigError("band-pass: order must be even and >= 2");

  FirFilter f;
  f.fs = fs;
  f.low_hz = low_hz;
  f.high_hz = high_hz;
  f.taps.resize(order + 1);
  const double f1 = low_hz / fs, f2 = high_hz / fs;
  const double mid = static_cast<double>(order) / 2.0;
  for (std::size_t k = 0; k <= order / 2; ++k) {
    const double m = static_cast<double>(k) - mid;
    const double ideal = 2.0 * f2 * sinc(2.0 * f2 * m) - 2.0 * f1 * sinc(2.0 * f1 * m);
    const double window =
        0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(k) / static_cast<double>(order));
    f.taps[k] = ideal * window;
    f.taps[order - k] = f.taps[k];
  }
  const double gain = std::abs(frequency_response(f, 0.5 * (low_hz + high_hz)));
  for (double& t : f.taps) t /= gain;
  return f;
}

std::complex<double> frequency_response(const FirFilter& filter, double f_hz) {
  std::complex<double> h{0.0, 0.0};
  const double w = 2.0 * kPi * f_hz / filter.fs;
  for (std::size_t k = 0; k < filter.taps.size(); ++k)
    h += filter.taps[k] * std::polar(1.0, -w * static_cast<double>(k));
  return h;
}

std::vector<double> filter_zero_phase(std::span<const double> x, const FirFilter& filter) {
  const std::size_t order = filter.order();
  const std::size_t n = x.size();
  if (n <= 3 * order)
    throw LengthError("zero-phase filtering needs more than 3*order samples (" +
                      std::to_string(3 * order) + ")");
  // Odd reflection at both ends suppresses start-up transients.
  const std::size_t pad = std::min(3 * order, n - 1);
  std::vector<double> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) {
    ext[i] = 2.0 * x[0] - x[pad - i];
    ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];
  }
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));

  const std::size_t delay = order / 2;
  // The taps are symmetric, so the causal output delayed by order/2 is the
  // linear-phase response aligned with the input. Running it twice (the
  // second time on the reversed series) yields the zero-phase |H|^2 result.
  auto pass = [&](std::vector<double>& s) {
    const auto y = fft::convolve(s, filter.taps);
    std::copy(y.begin() + static_cast<std::ptrdiff_t>(delay),
              y.begin() + static_cast<std::ptrdiff_t>(delay + s.size()), s.begin());
  };
  pass(ext);
  std::reverse(ext.begin(), ext.end());
  pass(ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

Recording filter_zero_phase(const Recording& rec, const FirFilter& filter) {
  Recording out = rec;
  const auto channels = static_cast<std::ptrdiff_t>(rec.data.rows());
  if (rec.data.cols() <= 3 * filter.order())
    throw LengthError("zero-phase filtering needs more than 3*order samples");
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < channels; ++c) {
    const auto y = filter_zero_phase(rec.data.row(static_cast<std::size_t>(c)), filter);
    std::copy(y.begin(), y.end(), out.data.row(static_cast<std::size_t>(c)).begin());
  }
  return out;
}

std::size_t frame_count(std::size_t samples, std::size_t frame_len, double overlap) {
  if (frame_len == 0) throw ConfigError("frame length must be positive");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("overlap must be in [0, 1)");
  if (samples < frame_len) return 0;
  const auto step = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(frame_len) * (1.0 - overlap))));
  return (samples - frame_len) / step + 1;
}

std::vector<Frame> frame(const Recording& rec, double frame_seconds, double overlap) {
  if (!(frame_seconds > 0.0)) throw ConfigError("frame_seconds must be positive");
  const auto len = static_cast<std::size_t>(std::llround(frame_seconds * rec.fs));
  const std::size_t count = frame_count(rec.sample_count(), len, overlap);
  if (count == 0) throw LengthError("recording shorter than one frame");
  const auto step = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(len) * (1.0 - overlap))));
  std::vector<Frame> frames(count);
  for (std::size_t f = 0; f < count; ++f) {
    Frame& fr = frames[f];
    fr.subject_id = rec.subject_id;
    fr.protocol = rec.protocol;
    fr.frame_index = f;
    fr.data = RowMatrix(rec.channel_count(), len);
    for (std::size_t c = 0; c < rec.channel_count(); ++c) {
      const auto src = rec.data.row(c).subspan(f * step, len);
      std::copy(src.begin(), src.end(), fr.data.row(c).begin());
    }
  }
  return frames;
}

std::vector<double> instantaneous_phase(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 8) throw LengthError("instantaneous phase needs at least 8 samples");
  if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; }))
    throw DegenerateSignal("phase undefined for an all-zero channel");
  auto spec = fft::forward(x);
  // Analytic signal: keep DC (and Nyquist for even n), double positive
  // frequencies, zero negative ones.
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    if (k < (n + 1) / 2)
      spec[k] *= 2.0;
    else if (!(n % 2 == 0 && k == half))
      spec[k] = 0.0;
  }
  const auto analytic = fft::inverse(spec);
  std::vector<double> phase(n);
  for (std::size_t t = 0; t < n; ++t) {
    double p = std::arg(analytic[t]);
    if (p <= -kPi) p = kPi;
    phase[t] = p;
  }
  return phase;
}

PhaseFrame instantaneous_phase(const Frame& frame) {
  PhaseFrame out;
  out.subject_id = frame.subject_id;
  out.protocol = frame.protocol;
  out.frame_index = frame.frame_index;
  out.phase = RowMatrix(frame.data.rows(), frame.data.cols());
  for (std::size_t c = 0; c < frame.data.rows(); ++c) {
    const auto p = instantaneous_phase(frame.data.row(c));
    std::copy(p.begin(), p.end(), out.phase.row(c).begin());
  }
  return out;
}

PreprocessedRecording preprocess(const Recording& rec, const DspConfig& cfg) {
  validate(rec);
  const Recording clean = detrend(rec);
  const FirFilter pre = design_bandpass(rec.fs, cfg.prefilter_low, cfg.prefilter_high, cfg.fir_order);
  const FirFilter band = design_bandpass(rec.fs, cfg.band_low, cfg.band_high, cfg.fir_order);
  const Recording broadband = filter_zero_phase(clean, pre);
  const Recording beta = filter_zero_phase(broadband, band);
  return {frame(broadband, cfg.frame_seconds, cfg.overlap),
          frame(beta, cfg.frame_seconds, cfg.overlap)};
}

}  // namespace neurolock
