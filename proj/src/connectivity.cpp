#include "neurolock/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "neurolock/error.hpp"

namespace neurolock {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

std::vector<double> relative_phase(std::span<const double> phase_i,
                                   std::span<const double> phase_j) {
  if (phase_i.size() != phase_j.size())
    throw ShapeError("relative_phase: series lengths differ");
  std::vector<double> out(phase_i.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    double d = std::fmod(std::fabs(phase_i[t] - phase_j[t]), kTwoPi);
    if (d >= kTwoPi) d = 0.0;
    out[t] = d;
  }
  return out;
}

std::size_t default_bin_count(std::size_t length) {
  if (length < 2) return 8;
  const double k = std::ceil(std::exp(0.626 + 0.4 * std::log(static_cast<double>(length - 1))));
  return std::max<std::size_t>(8, static_cast<std::size_t>(k));
}

double rho_index(std::span<const double> rel_phase, std::size_t bins) {
  if (bins < 2) throw LengthError("rho_index needs at least 2 bins");
  if (rel_phase.size() < bins) throw LengthError("rho_index: fewer samples than bins");
  std::vector<std::size_t> counts(bins, 0);
  const double scale = static_cast<double>(bins) / kTwoPi;
  for (double v : rel_phase) {
    auto b = static_cast<std::ptrdiff_t>(std::floor(v * scale));
    b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const double n = static_cast<double>(rel_phase.size());
  double entropy = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    entropy -= p * std::log(p);
  }
  const double s_uni = std::log(static_cast<double>(bins));
  return std::clamp((s_uni - entropy) / s_uni, 0.0, 1.0);
}

ConnectivityGraph build_graph(const RowMatrix& phase, std::size_t bins) {
  const std::size_t n = phase.rows();
  if (n < 2) throw ShapeError("build_graph needs at least 2 channels");
  ConnectivityGraph g;
  g.bins = bins == 0 ? default_bin_count(phase.cols()) : bins;
  g.adjacency = RowMatrix(n, n);
  // Unordered pairs enumerated by a flat index so the loop is balanced.
  const auto pairs = static_cast<std::ptrdiff_t>(n * (n - 1) / 2);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t idx = 0; idx < pairs; ++idx) {
    std::size_t i = 0;
    auto rem = static_cast<std::size_t>(idx);
    while (rem >= n - 1 - i) {
      rem -= n - 1 - i;
      ++i;
    }
    const std::size_t j = i + 1 + rem;
    const double r = rho_index(relative_phase(phase.row(i), phase.row(j)), g.bins);
    g.adjacency(i, j) = r;
    g.adjacency(j, i) = r;
  }
  return g;
}

ConnectivityGraph build_graph(const PhaseFrame& frame, std::size_t bins) {
  return build_graph(frame.phase, bins);
}

void validate(const ConnectivityGraph& graph) {
  const auto& a = graph.adjacency;
  if (a.rows() != a.cols()) throw ShapeError("graph adjacency is not square");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (a(i, i) != 0.0) throw ShapeError("graph adjacency has a nonzero diagonal");
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double w = a(i, j);
      if (!(w >= 0.0 && w <= 1.0)) throw ShapeError("graph weight outside [0, 1]");
      if (w != a(j, i)) throw ShapeError("graph adjacency is not symmetric");
    }
  }
}

}  // namespace neurolock
