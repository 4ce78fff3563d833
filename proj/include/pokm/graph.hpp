#pragma once

#include "pokm/types.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pokm {

using ClusterPair = std::pair<Index, Index>;  // first < second

/// Undirected graph of cluster relations. An edge joins two clusters when
/// the number of elements they share exceeds gamma * min(|c_i|, |c_j|).
struct ClusterGraph {
  struct Vertex {
    Index cluster = 0;
    std::size_t size = 0;  // all members, shared ones included
    friend bool operator==(const Vertex&, const Vertex&) = default;
  };
  struct Edge {
    Index i = 0;
    Index j = 0;
    std::size_t overlap_count = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
  };

  std::vector<Vertex> vertices;
  std::vector<Edge> edges;  // sorted by (i, j)
  double gamma = 0.1;

  bool has_edge(Index a, Index b) const;
  // overlap_count / min(size_i, size_j), the quantity the threshold tests.
  double ratio(const Edge& e) const;

  friend bool operator==(const ClusterGraph&, const ClusterGraph&) = default;
};

inline constexpr int kGraphSchemaVersion = 1;

// Number of elements shared by each pair of clusters; pairs sharing nothing are omitted.
std::map<ClusterPair, std::size_t> count_overlaps(const Assignments& assignments);

std::vector<std::size_t> cluster_sizes(const Assignments& assignments, Index k);

ClusterGraph extract_graph(const Assignments& assignments, Index k, double gamma);

template <typename Scalar>
std::map<ClusterPair, std::size_t> count_overlaps(const ClusterModel<Scalar>& model) {
  return count_overlaps(model.assignments);
}

template <typename Scalar>
ClusterGraph extract_graph(const ClusterModel<Scalar>& model, double gamma) {
  return extract_graph(model.assignments, model.k(), gamma);
}

std::string to_dot(const ClusterGraph& graph);

// Keys, in order: schema, version, gamma, vertices[{cluster, size}],
// edges[{i, j, overlap_count, ratio}].
std::string to_json(const ClusterGraph& graph);

// Throws std::invalid_argument on schema violations (i >= j, unknown
// vertices, duplicate edges, wrong version).
ClusterGraph graph_from_json(const std::string& text);

}  // namespace pokm
