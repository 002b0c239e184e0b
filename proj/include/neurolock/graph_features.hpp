#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neurolock/connectivity.hpp"
#include "neurolock/ingest.hpp"
#include "neurolock/matrix.hpp"

namespace neurolock {

/// Graph feature vector: N pagerank scores followed by transitivity,
/// modularity, characteristic path length, global efficiency, radius and
/// diameter (length N + 6).
struct FeatureVector {
  std::vector<double> values;
  Protocol protocol = Protocol::OTHER;
  std::string subject_id;
  std::size_t frame_index = 0;
};

/// Column names in feature order: pr0..pr{N-1}, transitivity, modularity,
/// char_path_length, global_efficiency, radius, diameter.
std::vector<std::string> graph_feature_names(std::size_t n_nodes);

struct PagerankOptions {
  double damping = 0.85;
  double tol = 1e-12;
  std::size_t max_iter = 1000;
};

/// Stationary distribution of the damped random walk whose transition
/// probabilities are proportional to edge weight. Sums to 1.
std::vector<double> pagerank_centrality(const ConnectivityGraph& graph,
                                        const PagerankOptions& opts = {});

/// Weighted transitivity, sum_i 2 t_i / sum_i k_i (k_i - 1), with
/// t_i = 1/2 sum_{j,h} (w_ij w_ih w_jh)^(1/3) and k_i the binary degree.
double transitivity(const ConnectivityGraph& graph);

struct Partition {
  std::vector<std::size_t> membership;  // community id per node, 0-based, dense
  double quality = 0.0;
};

/// Newman modularity of a given partition, with l = sum_ij w_ij.
double modularity_of(const RowMatrix& adjacency, const std::vector<std::size_t>& membership);

/// Graphs up to this size are partitioned by exhaustive search.
inline constexpr std::size_t kExactModularityNodes = 9;

/// Best partition found by seeded multi-level Louvain (resolution 1). Runs
/// `restarts` node orderings and keeps the best; never reports less than the
/// single-community partition (Q = 0). Small graphs (see above) get the exact
/// optimum instead, and the seed is unused.
Partition louvain(const ConnectivityGraph& graph, std::uint64_t seed, std::size_t restarts = 8);

/// Q of the partition returned by louvain().
double modularity(const ConnectivityGraph& graph, std::uint64_t seed);

/// All-pairs shortest paths with edge length 1/w (infinite for w == 0).
RowMatrix distance_matrix(const ConnectivityGraph& graph);

struct GlobalDescriptors {
  double char_path_length = 0.0;
  double efficiency = 0.0;
  double radius = 0.0;
  double diameter = 0.0;
};

GlobalDescriptors global_descriptors(const RowMatrix& distances);
GlobalDescriptors global_descriptors(const ConnectivityGraph& graph);

FeatureVector extract_features(const ConnectivityGraph& graph, std::uint64_t seed);

}  // namespace neurolock
