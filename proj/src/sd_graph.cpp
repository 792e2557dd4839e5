#include "sdmapkit/sd_graph.hpp"

#include <algorithm>
#include <numeric>

namespace sdmapkit {

BoolMatrix adjacency_matrix(const SdMapGraph& graph) {
  const std::size_t n = graph.nodes.size();
  BoolMatrix adj(n, std::vector<std::uint8_t>(n, 0));
  for (const auto& e : graph.edges) {
    adj[e.a][e.b] = 1;
    adj[e.b][e.a] = 1;
  }
  return adj;
}

std::vector<std::size_t> degrees(const SdMapGraph& graph) {
  std::vector<std::size_t> deg(graph.nodes.size(), 0);
  for (const auto& e : graph.edges) {
    ++deg[e.a];
    ++deg[e.b];
  }
  return deg;
}

std::size_t connected_components(const SdMapGraph& graph) {
  std::vector<std::size_t> parent(graph.nodes.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  std::size_t components = graph.nodes.size();
  for (const auto& e : graph.edges) {
    const std::size_t ra = find(e.a);
    const std::size_t rb = find(e.b);
    if (ra != rb) {
      parent[std::max(ra, rb)] = std::min(ra, rb);
      --components;
    }
  }
  return components;
}

double total_edge_length(const SdMapGraph& graph) {
  double total = 0.0;
  for (const auto& e : graph.edges) {
    total += distance(graph.nodes[e.a].position, graph.nodes[e.b].position);
  }
  return total;
}

double max_edge_length(const SdMapGraph& graph) {
  double longest = 0.0;
  for (const auto& e : graph.edges) {
    longest = std::max(longest, distance(graph.nodes[e.a].position, graph.nodes[e.b].position));
  }
  return longest;
}

}  // namespace sdmapkit
