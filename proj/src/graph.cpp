#include "pokm/graph.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace pokm {

namespace {

ClusterPair ordered(Index a, Index b) { return a < b ? ClusterPair{a, b} : ClusterPair{b, a}; }

}  // namespace

bool ClusterGraph::has_edge(Index a, Index b) const {
  const auto [i, j] = ordered(a, b);
  return std::any_of(edges.begin(), edges.end(), [&](const Edge& e) { return e.i == i && e.j == j; });
}

double ClusterGraph::ratio(const Edge& e) const {
  const auto smaller = std::min(vertices.at(static_cast<std::size_t>(e.i)).size,
                                vertices.at(static_cast<std::size_t>(e.j)).size);
  return smaller == 0 ? 0.0 : static_cast<double>(e.overlap_count) / static_cast<double>(smaller);
}

std::map<ClusterPair, std::size_t> count_overlaps(const Assignments& assignments) {
  std::map<ClusterPair, std::size_t> counts;
  for (const auto& a : assignments)
    if (a.secondary) ++counts[ordered(a.primary, *a.secondary)];
  return counts;
}

std::vector<std::size_t> cluster_sizes(const Assignments& assignments, Index k) {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (const auto& a : assignments) {
    ++sizes.at(static_cast<std::size_t>(a.primary));
    if (a.secondary) ++sizes.at(static_cast<std::size_t>(*a.secondary));
  }
  return sizes;
}

ClusterGraph extract_graph(const Assignments& assignments, Index k, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (k < 1) throw std::invalid_argument("k must be at least 1");

  ClusterGraph g;
  g.gamma = gamma;
  const auto sizes = cluster_sizes(assignments, k);
  for (Index i = 0; i < k; ++i) g.vertices.push_back({i, sizes[static_cast<std::size_t>(i)]});

  for (const auto& [pair, count] : count_overlaps(assignments)) {
    const auto smaller = std::min(sizes[static_cast<std::size_t>(pair.first)],
                                  sizes[static_cast<std::size_t>(pair.second)]);
    if (static_cast<double>(count) > gamma * static_cast<double>(smaller))
      g.edges.push_back({pair.first, pair.second, count});
  }
  return g;
}

std::string to_dot(const ClusterGraph& graph) {
  std::ostringstream out;
  out << "graph clusters {\n";
  for (const auto& v : graph.vertices)
    out << "  C" << v.cluster << " [label=\"C" << v.cluster << " (n=" << v.size << ")\"];\n";
  for (const auto& e : graph.edges)
    out << "  C" << e.i << " -- C" << e.j << " [label=\"" << e.overlap_count << "\"];\n";
  out << "}\n";
  return out.str();
}

std::string to_json(const ClusterGraph& graph) {
  nlohmann::ordered_json j;
  j["schema"] = "pokm.graph";
  j["version"] = kGraphSchemaVersion;
  j["gamma"] = graph.gamma;
  j["vertices"] = nlohmann::ordered_json::array();
  for (const auto& v : graph.vertices) j["vertices"].push_back({{"cluster", v.cluster}, {"size", v.size}});
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : graph.edges)
    j["edges"].push_back({{"i", e.i}, {"j", e.j}, {"overlap_count", e.overlap_count}, {"ratio", graph.ratio(e)}});
  return j.dump(2) + "\n";
}

ClusterGraph graph_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("graph JSON does not parse: ") + e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != "pokm.graph") throw std::invalid_argument("not a pokm.graph document");
    if (j.at("version").get<int>() != kGraphSchemaVersion)
      throw std::invalid_argument("unsupported graph schema version");

    ClusterGraph g;
    g.gamma = j.at("gamma").get<double>();
    if (!(g.gamma >= 0.0 && g.gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
    for (const auto& v : j.at("vertices")) {
      ClusterGraph::Vertex vx{v.at("cluster").get<Index>(), v.at("size").get<std::size_t>()};
      if (vx.cluster != static_cast<Index>(g.vertices.size()))
        throw std::invalid_argument("vertices must be listed in index order starting at 0");
      g.vertices.push_back(vx);
    }
    std::set<ClusterPair> seen;
    for (const auto& e : j.at("edges")) {
      ClusterGraph::Edge ed{e.at("i").get<Index>(), e.at("j").get<Index>(), e.at("overlap_count").get<std::size_t>()};
      if (ed.i >= ed.j) throw std::invalid_argument("edge must satisfy i < j");
      if (ed.i < 0 || ed.j >= static_cast<Index>(g.vertices.size()))
        throw std::invalid_argument("edge references an unknown vertex");
      if (!seen.insert({ed.i, ed.j}).second) throw std::invalid_argument("duplicate edge");
      if (!g.edges.empty() && ClusterPair{ed.i, ed.j} < ClusterPair{g.edges.back().i, g.edges.back().j})
        throw std::invalid_argument("edges must be sorted by (i, j)");
      g.edges.push_back(ed);
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed graph JSON: ") + e.what());
  }
}

}  // namespace pokm
