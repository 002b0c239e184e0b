#pragma once

#include <complex>
#include <span>
#include <vector>

namespace neurolock::fft {

/// Forward DFT of a real series (full spectrum, length n). Thread-safe.
std::vector<std::complex<double>> forward(std::span<const double> x);

/// Unnormalized-inverse divided by n, so inverse(forward(x)) == x.
std::vector<std::complex<double>> inverse(std::span<const std::complex<double>> spectrum);

/// Linear convolution of x with h (length x.size() + h.size() - 1).
std::vector<double> convolve(std::span<const double> x, std::span<const double> h);

}  // namespace neurolock::fft
