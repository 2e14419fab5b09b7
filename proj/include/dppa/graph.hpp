#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dppa/rng.hpp"

namespace dppa {

// Undirected communication graph on nodes 0..n-1. Edges are stored as
// (i, j) pairs with i < j, sorted lexicographically; `degrees` is derived.
struct CommGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> degrees;
};

inline constexpr int kGraphRetryCap = 1000;

// Builds a CommGraph from an edge list, normalizing pair order and
// rejecting self-loops, out-of-range indices, and duplicates.
inline CommGraph make_graph(int n, std::vector<std::pair<int, int>> edges) {
  if (n < 1) throw std::invalid_argument("make_graph: n must be positive");
  for (auto& [i, j] : edges) {
    if (i == j) throw std::invalid_argument("make_graph: self-loop at node " + std::to_string(i));
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw std::invalid_argument("make_graph: edge index out of range");
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw std::invalid_argument("make_graph: duplicate edge");

  CommGraph g;
  g.n = n;
  g.edges = std::move(edges);
  g.degrees.assign(static_cast<std::size_t>(n), 0);
  for (const auto& [i, j] : g.edges) {
    ++g.degrees[static_cast<std::size_t>(i)];
    ++g.degrees[static_cast<std::size_t>(j)];
  }
  return g;
}

inline std::vector<std::vector<int>> adjacency_lists(const CommGraph& g) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.n));
  for (const auto& [i, j] : g.edges) {
    adj[static_cast<std::size_t>(i)].push_back(j);
    adj[static_cast<std::size_t>(j)].push_back(i);
  }
  return adj;
}

// True iff every node is reachable from node 0.
inline bool is_connected(const CommGraph& g) {
  if (g.n <= 1) return true;
  const auto adj = adjacency_lists(g);
  std::vector<char> seen(static_cast<std::size_t>(g.n), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == g.n;
}

namespace detail {

// One Erdos-Renyi draw from the stream (seed, attempt). Pairs are visited
// in lexicographic order so the draw is reproducible.
inline CommGraph sample_graph(int n, double link_prob, std::uint64_t seed,
                              std::uint64_t attempt) {
  CounterRng rng(seed, attempt);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.next_unit() < link_prob) edges.emplace_back(i, j);
  return make_graph(n, std::move(edges));
}

}  // namespace detail

// Samples a connected graph: each unordered pair is linked independently
// with probability link_prob; disconnected draws are rejected and the
// next attempt uses the stream derived from (seed, attempt+1). Identical
// (n, link_prob, seed) always yield the identical graph.
inline CommGraph generate_random_graph(int n, double link_prob, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("generate_random_graph: need n >= 2");
  if (!(link_prob > 0.0) || link_prob > 1.0)
    throw std::invalid_argument("generate_random_graph: link_prob must be in (0, 1]");
  for (std::uint64_t attempt = 0; attempt < kGraphRetryCap; ++attempt) {
    CommGraph g = detail::sample_graph(n, link_prob, seed, attempt);
    if (is_connected(g)) return g;
  }
  throw std::runtime_error(
      "generate_random_graph: no connected sample within " +
      std::to_string(kGraphRetryCap) + " attempts (link_prob too small for n?)");
}

}  // namespace dppa
