#include "neurolock/serial.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "neurolock/error.hpp"

namespace neurolock::serial {

std::vector<double> filter_zero_phase(std::span<const double> x, const FirFilter& filter) {
  const std::size_t order = filter.order();
  const std::size_t n = x.size();
  if (n <= 3 * order) throw LengthError("zero-phase filtering needs more than 3*order samples");
  const std::size_t pad = std::min(3 * order, n - 1);
  std::vector<double> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) {
    ext[i] = 2.0 * x[0] - x[pad - i];
    ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];
  }
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));
  const std::size_t delay = order / 2;
  const auto& h = filter.taps;
  auto pass = [&](std::vector<double>& s) {
    std::vector<double> y(s.size(), 0.0);
    for (std::size_t t = 0; t < s.size(); ++t) {
      // Output sample t is the causal output at t + delay.
      const std::size_t at = t + delay;
      double acc = 0.0;
      for (std::size_t k = 0; k < h.size(); ++k) {
        if (k > at) break;
        const std::size_t idx = at - k;
        if (idx < s.size()) acc += h[k] * s[idx];
      }
      y[t] = acc;
    }
    s.swap(y);
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
  for (std::size_t c = 0; c < rec.data.rows(); ++c) {
    const auto y = serial::filter_zero_phase(rec.data.row(c), filter);
    std::copy(y.begin(), y.end(), out.data.row(c).begin());
  }
  return out;
}

ConnectivityGraph build_graph(const RowMatrix& phase, std::size_t bins) {
  const std::size_t n = phase.rows();
  if (n < 2) throw ShapeError("build_graph needs at least 2 channels");
  ConnectivityGraph g;
  g.bins = bins == 0 ? default_bin_count(phase.cols()) : bins;
  g.adjacency = RowMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = rho_index(relative_phase(phase.row(i), phase.row(j)), g.bins);
      g.adjacency(i, j) = r;
      g.adjacency(j, i) = r;
    }
  return g;
}

RowMatrix distance_matrix(const ConnectivityGraph& graph) {
  const auto& w = graph.adjacency;
  const std::size_t n = w.rows();
  constexpr double inf = std::numeric_limits<double>::infinity();
  RowMatrix d(n, n, inf);
  for (std::size_t s = 0; s < n; ++s) {
    auto dist = d.row(s);
    std::vector<char> done(n, 0);
    dist[s] = 0.0;
    for (std::size_t step = 0; step < n; ++step) {
      std::size_t u = n;
      double best = inf;
      for (std::size_t v = 0; v < n; ++v)
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      if (u == n) break;
      done[u] = 1;
      for (std::size_t v = 0; v < n; ++v) {
        if (done[v] || w(u, v) <= 0.0) continue;
        const double cand = dist[u] + 1.0 / w(u, v);
        if (cand < dist[v]) dist[v] = cand;
      }
    }
  }
  return d;
}

double fuzzy_entropy(std::span<const double> x, std::size_t m, double r_factor, double n_exp) {
  const std::size_t n = x.size();
  if (n <= m + 2) throw LengthError("FuzzEn: series too short");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n));
  if (sd == 0.0) throw DegenerateSignal("FuzzEn: constant series (r = 0)");
  const double r = r_factor * sd;
  const std::size_t count = n - m;
  auto phi = [&](std::size_t dim) {
    std::vector<double> tmpl(count * dim);
    for (std::size_t i = 0; i < count; ++i) {
      double mu = 0.0;
      for (std::size_t d = 0; d < dim; ++d) mu += x[i + d];
      mu /= static_cast<double>(dim);
      for (std::size_t d = 0; d < dim; ++d) tmpl[i * dim + d] = x[i + d] - mu;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < count; ++j) {
        if (j == i) continue;
        double dist = 0.0;
        for (std::size_t d = 0; d < dim; ++d)
          dist = std::max(dist, std::fabs(tmpl[i * dim + d] - tmpl[j * dim + d]));
        acc += std::exp(-std::pow(dist / r, n_exp));
      }
      total += acc / static_cast<double>(count - 1);
    }
    return total / static_cast<double>(count);
  };
  return std::max(0.0, std::log(phi(m)) - std::log(phi(m + 1)));
}

RowMatrix hamming_matrix(const std::vector<std::vector<std::uint8_t>>& queries,
                         const std::vector<std::vector<std::uint8_t>>& references) {
  RowMatrix out(queries.size(), references.size());
  for (std::size_t q = 0; q < queries.size(); ++q)
    for (std::size_t r = 0; r < references.size(); ++r) {
      const auto& a = queries[q];
      const auto& b = references[r];
      if (a.size() != b.size()) throw IncompatibleTemplates("bit strings differ in length");
      std::size_t d = 0;
      for (std::size_t i = 0; i < a.size(); ++i)
        d += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(a[i] ^ b[i])));
      out(q, r) = static_cast<double>(d) / static_cast<double>(8 * a.size());
    }
  return out;
}

}  // namespace neurolock::serial
