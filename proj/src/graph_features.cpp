#include "neurolock/graph_features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "neurolock/error.hpp"
#include "neurolock/rng.hpp"

namespace neurolock {

std::vector<std::string> graph_feature_names(std::size_t n_nodes) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n_nodes; ++i) names.push_back("pr" + std::to_string(i));
  for (const char* s : {"transitivity", "modularity", "char_path_length",
                        "global_efficiency", "radius", "diameter"})
    names.emplace_back(s);
  return names;
}

std::vector<double> pagerank_centrality(const ConnectivityGraph& graph,
                                        const PagerankOptions& opts) {
  const auto& w = graph.adjacency;
  const std::size_t n = w.rows();
  if (n == 0 || w.cols() != n) throw ShapeError("pagerank: adjacency must be square");
  std::vector<double> strength(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (w(i, j) < 0.0) throw ShapeError("pagerank: negative edge weight");
      strength[i] += w(i, j);
    }

  const double uniform = 1.0 / static_cast<double>(n);
  std::vector<double> x(n, uniform), next(n);
  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    double dangling = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (strength[i] == 0.0) dangling += x[i];
    const double base = (1.0 - opts.damping) * uniform + opts.damping * dangling * uniform;
    std::fill(next.begin(), next.end(), base);
    for (std::size_t i = 0; i < n; ++i) {
      if (strength[i] == 0.0) continue;
      const double share = opts.damping * x[i] / strength[i];
      for (std::size_t j = 0; j < n; ++j) next[j] += share * w(i, j);
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] /= total;
      change += std::fabs(next[j] - x[j]);
    }
    x.swap(next);
    if (change < opts.tol) return x;
  }
  throw ConvergenceError("pagerank did not converge in " + std::to_string(opts.max_iter) +
                         " iterations");
}

double transitivity(const ConnectivityGraph& graph) {
  const auto& w = graph.adjacency;
  const std::size_t n = w.rows();
  if (n < 3) throw ShapeError("transitivity needs at least 3 nodes");
  RowMatrix c(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c(i, j) = i == j ? 0.0 : std::cbrt(w(i, j));
  double closed = 0.0, triples = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t degree = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (w(i, j) != 0.0) ++degree;
      if (c(i, j) == 0.0) continue;
      for (std::size_t h = 0; h < n; ++h)
        if (h != i && h != j) closed += c(i, j) * c(i, h) * c(j, h);
    }
    triples += static_cast<double>(degree) * static_cast<double>(degree > 0 ? degree - 1 : 0);
  }
  return triples == 0.0 ? 0.0 : closed / triples;
}

double modularity_of(const RowMatrix& adjacency, const std::vector<std::size_t>& membership) {
  const std::size_t n = adjacency.rows();
  if (membership.size() != n) throw ShapeError("modularity: membership size mismatch");
  std::vector<double> k(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      k[i] += adjacency(i, j);
      total += adjacency(i, j);
    }
  if (!(total > 0.0)) throw DegenerateGraph("modularity: total edge weight is zero");
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (membership[i] == membership[j]) q += adjacency(i, j) - k[i] * k[j] / total;
  return q / total;
}

namespace {

// Local-move phase on a (possibly aggregated) weighted graph with
// self-loops, starting from `comm`. Nodes move to the neighbouring (or an
// empty) community with the largest modularity gain until no move helps.
// Leaves `comm` densely relabelled; returns whether anything moved.
bool local_moves(const RowMatrix& a, double total, Rng& rng, std::vector<std::size_t>& comm) {
  const std::size_t n = a.rows();
  std::vector<double> k(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k[i] += a(i, j);
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[comm[i]] += k[i];
  std::vector<double> link(n, 0.0);
  bool any_move = false;
  bool improved = true;
  while (improved) {
    improved = false;
    const auto order = rng.permutation(n);
    for (std::size_t i : order) {
      const std::size_t own = comm[i];
      std::fill(link.begin(), link.end(), 0.0);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) link[comm[j]] += a(i, j);
      tot[own] -= k[i];
      std::size_t best = own;
      double best_gain = link[own] - k[i] * tot[own] / total;
      std::size_t empty = n;
      for (std::size_t c = 0; c < n; ++c) {
        if (c == own) continue;
        if (tot[c] == 0.0 && link[c] == 0.0) {
          if (empty == n) empty = c;
          continue;
        }
        const double gain = link[c] - k[i] * tot[c] / total;
        if (gain > best_gain + 1e-14) {
          best_gain = gain;
          best = c;
        }
      }
      if (empty != n && 0.0 > best_gain + 1e-14) best = empty;
      tot[best] += k[i];
      if (best != own) {
        comm[i] = best;
        improved = true;
        any_move = true;
      }
    }
  }
  std::vector<std::size_t> remap(n, n);
  std::size_t next = 0;
  for (auto& c : comm) {
    if (remap[c] == n) remap[c] = next++;
    c = remap[c];
  }
  return any_move;
}

std::vector<std::size_t> louvain_once(const RowMatrix& adjacency, double total, Rng& rng) {
  const std::size_t n = adjacency.rows();
  std::vector<std::size_t> membership(n);
  std::iota(membership.begin(), membership.end(), std::size_t{0});
  RowMatrix level = adjacency;
  while (true) {
    std::vector<std::size_t> comm(level.rows());
    std::iota(comm.begin(), comm.end(), std::size_t{0});
    const bool moved = local_moves(level, total, rng, comm);
    if (!moved) break;
    const std::size_t groups = *std::max_element(comm.begin(), comm.end()) + 1;
    for (auto& m : membership) m = comm[m];
    RowMatrix agg(groups, groups);
    for (std::size_t i = 0; i < level.rows(); ++i)
      for (std::size_t j = 0; j < level.cols(); ++j) agg(comm[i], comm[j]) += level(i, j);
    level = std::move(agg);
    if (groups == 1) break;
  }
  // Final single-node refinement on the original graph.
  local_moves(adjacency, total, rng, membership);
  return membership;
}

// Every set partition as a restricted growth string; Q from the
// modularity matrix B_ij = w_ij - k_i k_j / l.
Partition exhaustive_partition(const RowMatrix& a, double total) {
  const std::size_t n = a.rows();
  std::vector<double> k(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k[i] += a(i, j);
  RowMatrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = a(i, j) - k[i] * k[j] / total;
  std::vector<std::size_t> g(n, 0), mx(n, 0);
  Partition best{g, 0.0};
  while (true) {
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (g[i] == g[j]) q += b(i, j);
    q /= total;
    if (q > best.quality + 1e-12) best = {g, q};
    std::size_t i = n - 1;
    while (i > 0 && g[i] == mx[i - 1] + 1) --i;
    if (i == 0) break;
    ++g[i];
    mx[i] = std::max(mx[i - 1], g[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      g[j] = 0;
      mx[j] = mx[i];
    }
  }
  return best;
}

}  // namespace

Partition louvain(const ConnectivityGraph& graph, std::uint64_t seed, std::size_t restarts) {
  const auto& a = graph.adjacency;
  const std::size_t n = a.rows();
  if (n < 2 || a.cols() != n) throw ShapeError("modularity needs a square graph with >= 2 nodes");
  double total = 0.0;
  for (double v : a.values()) total += v;
  if (!(total > 0.0)) throw DegenerateGraph("modularity: total edge weight is zero");

  if (n <= kExactModularityNodes) return exhaustive_partition(a, total);

  Partition best{std::vector<std::size_t>(n, 0), 0.0};
  for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
    Rng rng(seed, "louvain", r);
    auto membership = louvain_once(a, total, rng);
    const double q = modularity_of(a, membership);
    if (q > best.quality + 1e-12) best = {std::move(membership), q};
  }
  return best;
}

double modularity(const ConnectivityGraph& graph, std::uint64_t seed) {
  return louvain(graph, seed).quality;
}

RowMatrix distance_matrix(const ConnectivityGraph& graph) {
  const auto& w = graph.adjacency;
  const std::size_t n = w.rows();
  if (w.cols() != n) throw ShapeError("distance_matrix: adjacency must be square");
  constexpr double inf = std::numeric_limits<double>::infinity();
  RowMatrix d(n, n, inf);
  const auto sources = static_cast<std::ptrdiff_t>(n);
  // Dense Dijkstra from every source.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t ss = 0; ss < sources; ++ss) {
    const auto s = static_cast<std::size_t>(ss);
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

GlobalDescriptors global_descriptors(const RowMatrix& distances) {
  const std::size_t n = distances.rows();
  if (n < 2) throw ShapeError("global descriptors need at least 2 nodes");
  GlobalDescriptors g;
  g.radius = std::numeric_limits<double>::infinity();
  g.diameter = 0.0;
  double sum = 0.0, inv_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double ecc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dij = distances(i, j);
      if (!std::isfinite(dij)) throw DisconnectedGraph("graph is disconnected");
      sum += dij;
      inv_sum += 1.0 / dij;
      ecc = std::max(ecc, dij);
    }
    g.radius = std::min(g.radius, ecc);
    g.diameter = std::max(g.diameter, ecc);
  }
  const double pairs = static_cast<double>(n * (n - 1));
  g.char_path_length = sum / pairs;
  g.efficiency = inv_sum / pairs;
  return g;
}

GlobalDescriptors global_descriptors(const ConnectivityGraph& graph) {
  return global_descriptors(distance_matrix(graph));
}

FeatureVector extract_features(const ConnectivityGraph& graph, std::uint64_t seed) {
  FeatureVector fv;
  fv.values = pagerank_centrality(graph);
  const GlobalDescriptors g = global_descriptors(graph);
  fv.values.push_back(transitivity(graph));
  fv.values.push_back(modularity(graph, seed));
  fv.values.push_back(g.char_path_length);
  fv.values.push_back(g.efficiency);
  fv.values.push_back(g.radius);
  fv.values.push_back(g.diameter);
  return fv;
}

}  // namespace neurolock
