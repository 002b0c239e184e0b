#pragma once

#include <array>
#include <span>
#include <vector>

#include "neurolock/dsp.hpp"

namespace neurolock {

enum class BaselineKind { AR, PSD, FuzzEn, Concat };

struct BaselineFeatureVector {
  std::vector<double> values;
  BaselineKind kind = BaselineKind::AR;
};

/// Expected length of a baseline vector of `kind` for `channels` channels:
/// AR 5N, PSD 5N, FuzzEn N, Concat 11N.
std::size_t baseline_length(BaselineKind kind, std::size_t channels);

/// Burg-recursion reflection coefficients k_1..k_order. Convention: the
/// forward prediction error is updated as f + k * b, so an AR(1) process
/// x_t = a x_{t-1} + e gives k_1 close to -a.
std::vector<double> ar_reflection_coeffs(std::span<const double> x, std::size_t order = 5);

/// Frequency bands in Hz: delta [0.5,4), theta [4,8), alpha [8,13),
/// beta [13,30), gamma [30,42].
inline constexpr std::array<std::array<double, 2>, 5> kEegBands{{
    {0.5, 4.0}, {4.0, 8.0}, {8.0, 13.0}, {13.0, 30.0}, {30.0, 42.0}}};

/// One-sided Welch PSD (160-sample Hamming segments, 50% overlap, mean
/// removed per segment). Returns (frequencies, density).
struct Spectrum {
  std::vector<double> freq;
  std::vector<double> density;
};
Spectrum welch_psd(std::span<const double> x, double fs, std::size_t segment = 160);

/// Power in each EEG band: the Welch density integrated over the band's
/// frequency bins (sum of density * bin width). Units are uV^2, so the five
/// values are directly comparable with the signal variance.
std::array<double, 5> band_powers(std::span<const double> x, double fs);

/// Fuzzy entropy with mean-removed templates, Chebyshev distance and
/// membership exp(-(d / r)^n_exp), r = r_factor * population std.
double fuzzy_entropy(std::span<const double> x, std::size_t m = 2, double r_factor = 0.2,
                     double n_exp = 2.0);

BaselineFeatureVector ar_features(const Frame& frame);
BaselineFeatureVector psd_features(const Frame& frame, double fs);
BaselineFeatureVector fuzzen_features(const Frame& frame);

/// AR, then PSD, then FuzzEn.
BaselineFeatureVector concat_baselines(const BaselineFeatureVector& ar,
                                       const BaselineFeatureVector& psd,
                                       const BaselineFeatureVector& fuzzen);

}  // namespace neurolock
