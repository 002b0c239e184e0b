#pragma once

// Single-threaded reference versions of the OpenMP kernels. They share the
// arithmetic of the parallel code path and exist so tests and the benchmark
// can check and time the parallel versions against them.

#include <cstdint>
#include <span>
#include <vector>

#include "neurolock/connectivity.hpp"
#include "neurolock/dsp.hpp"
#include "neurolock/matrix.hpp"

namespace neurolock::serial {

/// Direct-form convolution forward-backward filter (no FFT).
std::vector<double> filter_zero_phase(std::span<const double> x, const FirFilter& filter);
Recording filter_zero_phase(const Recording& rec, const FirFilter& filter);

ConnectivityGraph build_graph(const RowMatrix& phase, std::size_t bins = 0);

RowMatrix distance_matrix(const ConnectivityGraph& graph);

double fuzzy_entropy(std::span<const double> x, std::size_t m = 2,
                     double r_factor = 0.2, double n_exp = 2.0);

/// Normalized Hamming distance of every row of `queries` against every
/// row of `references`, bit strings packed MSB-first into bytes.
RowMatrix hamming_matrix(const std::vector<std::vector<std::uint8_t>>& queries,
                         const std::vector<std::vector<std::uint8_t>>& references);

}  // namespace neurolock::serial
