#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "small_graph.hpp"
#include "ustat.hpp"

namespace rdpgboot {

/// Number of triangles, i.e. trace(A^3) / 6, by neighbourhood intersection.
inline std::uint64_t triangle_count(const AdjacencyMatrix& a) {
  std::uint64_t total = 0;
  const std::size_t words = a.words_per_row();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ri = a.row_bits(i);
    for (std::uint32_t j : a.neighbors(i)) {
      if (j <= i) continue;
      const auto rj = a.row_bits(j);
      // count k > j only
      const std::size_t start = (j + 1) >> 6;
      for (std::size_t w = start; w < words; ++w) {
        std::uint64_t x = ri[w] & rj[w];
        if (w == start) x &= ~std::uint64_t{0} << ((j + 1) & 63);
        total += static_cast<std::uint64_t>(std::popcount(x));
      }
    }
  }
  return total;
}

/// C(n, 3)^{-1} sum_{i<j<k} A_ij A_jk A_ki.
inline double triangle_density(const AdjacencyMatrix& a) {
  if (a.size() < 3) throw InvalidArgument("triangle density requires n >= 3");
  return static_cast<double>(triangle_count(a)) / binomial(a.size(), 3);
}

/// Fraction of m-vertex subsets whose induced subgraph is isomorphic to R.
inline double induced_subgraph_density(const AdjacencyMatrix& a, const SmallGraph& pattern) {
  const std::size_t m = pattern.vertices();
  if (a.size() < m) throw InvalidArgument("graph has fewer vertices than the pattern");
  std::vector<bool> matches(std::size_t{1} << pattern.pair_count(), false);
  for (std::uint32_t mask : pattern.isomorphic_copies()) matches[mask] = true;
  std::uint64_t hits = 0;
  for_each_combination(a.size(), m, [&](std::span<const std::size_t> c) {
    std::uint32_t mask = 0;
    std::size_t bit = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j, ++bit)
        if (a(c[i], c[j])) mask |= std::uint32_t{1} << bit;
    hits += matches[mask];
  });
  return static_cast<double>(hits) / binomial(a.size(), m);
}

/// Connected triples sum_{i<j<k} (A_ij A_jk + A_jk A_ki + A_ki A_ij)
/// = sum_v C(deg v, 2).
inline std::uint64_t connected_triple_count(const AdjacencyMatrix& a) {
  std::uint64_t total = 0;
  for (std::size_t v = 0; v < a.size(); ++v) {
    const std::uint64_t d = a.degree(v);
    total += d * (d - 1) / 2;  // d = 0 wraps to 0 * max = 0
  }
  return total;
}

/// 3 * #triangles / #connected triples.
inline double global_clustering(const AdjacencyMatrix& a) {
  const std::uint64_t triples = connected_triple_count(a);
  if (triples == 0) throw Error("no-paths", "global clustering undefined: graph has no paths of length 2");
  return 3.0 * static_cast<double>(triangle_count(a)) / static_cast<double>(triples);
}

/// C(n, 2)^{-1} sum_{i<j} d_A(i, j); requires a connected graph.
inline double average_shortest_path(const AdjacencyMatrix& a) {
  if (a.size() < 2) throw InvalidArgument("average shortest path requires n >= 2");
  double total = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    std::size_t reached = 0;
    detail::bfs_bits(a, s, [&](std::size_t v, std::uint32_t depth) {
      ++reached;
      if (v > s) total += depth;
    });
    if (reached != a.size()) throw DisconnectedGraphError();
  }
  return total / binomial(a.size(), 2);
}

/// (1/n) sum_i d_i / (n - 1).
inline double average_degree(const AdjacencyMatrix& a) {
  if (a.size() < 2) throw InvalidArgument("average degree requires n >= 2");
  const double n = static_cast<double>(a.size());
  return 2.0 * static_cast<double>(a.edge_count()) / (n * (n - 1.0));
}

struct NetworkStatistic {
  std::string name;
  std::function<double(const AdjacencyMatrix&)> evaluate;
  bool defined_on_disconnected = true;

  double operator()(const AdjacencyMatrix& a) const { return evaluate(a); }
};

inline std::vector<std::string> statistic_names() {
  return {"triangle-density", "global-clustering", "average-shortest-path", "average-degree", "edge-density"};
}

inline NetworkStatistic statistic_by_name(std::string_view name) {
  if (name == "triangle-density") return {"triangle-density", triangle_density, true};
  if (name == "global-clustering") return {"global-clustering", global_clustering, true};
  if (name == "average-shortest-path") return {"average-shortest-path", average_shortest_path, false};
  if (name == "average-degree") return {"average-degree", average_degree, true};
  if (name == "edge-density") return {"edge-density", rho_hat, true};
  throw InvalidArgument("unknown statistic '" + std::string(name) + "'");
}

}  // namespace rdpgboot
