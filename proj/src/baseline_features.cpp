#include "neurolock/baseline_features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "neurolock/error.hpp"
#include "neurolock/fft.hpp"

namespace neurolock {

std::size_t baseline_length(BaselineKind kind, std::size_t channels) {
  switch (kind) {
    case BaselineKind::AR: return 5 * channels;
    case BaselineKind::PSD: return 5 * channels;
    case BaselineKind::FuzzEn: return channels;
    case BaselineKind::Concat: return 11 * channels;
  }
  return 0;
}

namespace {
double population_variance(std::span<const double> x) {
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size());
}
}  // namespace

std::vector<double> ar_reflection_coeffs(std::span<const double> x, std::size_t order) {
  if (order < 1) throw ConfigError("AR order must be >= 1");
  if (x.size() <= 2 * order) throw LengthError("AR: series must be longer than 2*order");
  if (population_variance(x) == 0.0) throw DegenerateSignal("AR: zero-variance series");

  std::vector<double> f(x.begin() + 1, x.end());
  std::vector<double> b(x.begin(), x.end() - 1);
  std::vector<double> k(order);
  for (std::size_t m = 0; m < order; ++m) {
    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) {
      num += f[n] * b[n];
      den += f[n] * f[n] + b[n] * b[n];
    }
    if (den == 0.0) throw DegenerateSignal("AR: prediction error vanished");
    const double km = std::clamp(-2.0 * num / den, -1.0, 1.0);
    k[m] = km;
    for (std::size_t n = 0; n < f.size(); ++n) {
      const double fn = f[n];
      f[n] = fn + km * b[n];
      b[n] = b[n] + km * fn;
    }
    // Next stage pairs f[n+1] with b[n].
    f.erase(f.begin());
    b.pop_back();
  }
  return k;
}

Spectrum welch_psd(std::span<const double> x, double fs, std::size_t segment) {
  if (x.size() < 64) throw LengthError("Welch PSD needs at least 64 samples");
  const std::size_t nseg = std::min(segment, x.size());
  const std::size_t step = nseg - nseg / 2;
  std::vector<double> window(nseg);
  for (std::size_t i = 0; i < nseg; ++i)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                       static_cast<double>(nseg));
  double wss = 0.0;
  for (double w : window) wss += w * w;

  const std::size_t bins = nseg / 2 + 1;
  Spectrum s;
  s.freq.resize(bins);
  s.density.assign(bins, 0.0);
  for (std::size_t k = 0; k < bins; ++k)
    s.freq[k] = static_cast<double>(k) * fs / static_cast<double>(nseg);

  std::size_t count = 0;
  std::vector<double> seg(nseg);
  for (std::size_t start = 0; start + nseg <= x.size(); start += step) {
    const auto part = x.subspan(start, nseg);
    const double mean = std::accumulate(part.begin(), part.end(), 0.0) / static_cast<double>(nseg);
    for (std::size_t i = 0; i < nseg; ++i) seg[i] = (part[i] - mean) * window[i];
    const auto spec = fft::forward(seg);
    for (std::size_t k = 0; k < bins; ++k) {
      double p = std::norm(spec[k]) / (fs * wss);
      if (k != 0 && !(nseg % 2 == 0 && k == nseg / 2)) p *= 2.0;
      s.density[k] += p;
    }
    ++count;
  }
  for (double& d : s.density) d /= static_cast<double>(count);
  return s;
}

std::array<double, 5> band_powers(std::span<const double> x, double fs) {
  const Spectrum s = welch_psd(x, fs);
  const double df = s.freq.size() > 1 ? s.freq[1] - s.freq[0] : fs;
  std::array<double, 5> out{};
  for (std::size_t b = 0; b < kEegBands.size(); ++b) {
    const auto [lo, hi] = kEegBands[b];
    const bool closed = b + 1 == kEegBands.size();
    for (std::size_t k = 0; k < s.freq.size(); ++k) {
      const double f = s.freq[k];
      if (f >= lo && (f < hi || (closed && f <= hi))) out[b] += s.density[k] * df;
    }
  }
  return out;
}

double fuzzy_entropy(std::span<const double> x, std::size_t m, double r_factor, double n_exp) {
  const std::size_t n = x.size();
  if (m < 1) throw ConfigError("FuzzEn: m must be >= 1");
  if (n <= m + 2) throw LengthError("FuzzEn: series too short");
  const double sd = std::sqrt(population_variance(x));
  if (sd == 0.0) throw DegenerateSignal("FuzzEn: constant series (r = 0)");
  const double r = r_factor * sd;
  const std::size_t count = n - m;

  auto phi = [&](std::size_t dim) {
    // Mean-removed templates.
    std::vector<double> tmpl(count * dim);
    for (std::size_t i = 0; i < count; ++i) {
      double mean = 0.0;
      for (std::size_t d = 0; d < dim; ++d) mean += x[i + d];
      mean /= static_cast<double>(dim);
      for (std::size_t d = 0; d < dim; ++d) tmpl[i * dim + d] = x[i + d] - mean;
    }
    // Row sums are computed independently and reduced in index order so the
    // result does not depend on the thread count.
    std::vector<double> row(count, 0.0);
    const auto rows = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      double acc = 0.0;
      for (std::size_t j = 0; j < count; ++j) {
        if (j == i) continue;
        double dist = 0.0;
        for (std::size_t d = 0; d < dim; ++d)
          dist = std::max(dist, std::fabs(tmpl[i * dim + d] - tmpl[j * dim + d]));
        acc += std::exp(-std::pow(dist / r, n_exp));
      }
      row[i] = acc / static_cast<double>(count - 1);
    }
    double total = 0.0;
    for (double v : row) total += v;
    return total / static_cast<double>(count);
  };

  const double phi_m = phi(m);
  const double phi_m1 = phi(m + 1);
  return std::max(0.0, std::log(phi_m) - std::log(phi_m1));
}

BaselineFeatureVector ar_features(const Frame& frame) {
  BaselineFeatureVector v{{}, BaselineKind::AR};
  for (std::size_t c = 0; c < frame.data.rows(); ++c) {
    const auto k = ar_reflection_coeffs(frame.data.row(c), 5);
    v.values.insert(v.values.end(), k.begin(), k.end());
  }
  return v;
}

BaselineFeatureVector psd_features(const Frame& frame, double fs) {
  BaselineFeatureVector v{{}, BaselineKind::PSD};
  for (std::size_t c = 0; c < frame.data.rows(); ++c) {
    const auto p = band_powers(frame.data.row(c), fs);
    v.values.insert(v.values.end(), p.begin(), p.end());
  }
  return v;
}

BaselineFeatureVector fuzzen_features(const Frame& frame) {
  BaselineFeatureVector v{{}, BaselineKind::FuzzEn};
  for (std::size_t c = 0; c < frame.data.rows(); ++c)
    v.values.push_back(fuzzy_entropy(frame.data.row(c)));
  return v;
}

BaselineFeatureVector concat_baselines(const BaselineFeatureVector& ar,
                                       const BaselineFeatureVector& psd,
                                       const BaselineFeatureVector& fuzzen) {
  if (ar.kind != BaselineKind::AR || psd.kind != BaselineKind::PSD ||
      fuzzen.kind != BaselineKind::FuzzEn)
    throw ShapeError("concat_baselines: kinds must be AR, PSD, FuzzEn in that order");
  const std::size_t n = fuzzen.values.size();
  if (ar.values.size() != 5 * n || psd.values.size() != 5 * n)
    throw ShapeError("concat_baselines: channel counts differ");
  BaselineFeatureVector v{{}, BaselineKind::Concat};
  v.values.reserve(11 * n);
  v.values.insert(v.values.end(), ar.values.begin(), ar.values.end());
  v.values.insert(v.values.end(), psd.values.begin(), psd.values.end());
  v.values.insert(v.values.end(), fuzzen.values.begin(), fuzzen.values.end());
  return v;
}

}  // namespace neurolock
