#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "neurolock/dsp.hpp"
#include "neurolock/matrix.hpp"

namespace neurolock {

/// Undirected phase-synchronization graph: symmetric, entries in [0, 1],
/// zero diagonal.
struct ConnectivityGraph {
  RowMatrix adjacency;
  std::size_t bins = 0;

  std::size_t size() const noexcept { return adjacency.rows(); }
};

/// |phase_i - phase_j| mod 2pi, entries in [0, 2pi).
std::vector<double> relative_phase(std::span<const double> phase_i,
                                   std::span<const double> phase_j);

/// Default histogram bin count for a series of length L:
/// max(8, ceil(exp(0.626 + 0.4 ln(L - 1)))). Gives 19 for L = 320.
std::size_t default_bin_count(std::size_t length);

/// Entropy-based synchronization index (S_uni - S) / S_uni with
/// S_uni = ln K and S the Shannon entropy of a K-bin histogram of the
/// relative phase over [0, 2pi). Empty bins contribute 0.
double rho_index(std::span<const double> rel_phase, std::size_t bins);

/// rho for every channel pair; bins == 0 selects default_bin_count.
ConnectivityGraph build_graph(const PhaseFrame& frame, std::size_t bins = 0);
ConnectivityGraph build_graph(const RowMatrix& phase, std::size_t bins = 0);

/// Throws ShapeError unless the matrix is square, symmetric, with a zero
/// diagonal and entries in [0, 1].
void validate(const ConnectivityGraph& graph);

}  // namespace neurolock
