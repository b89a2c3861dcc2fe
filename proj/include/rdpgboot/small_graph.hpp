#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "error.hpp"

namespace rdpgboot {

/// Pattern graph on m <= 5 labelled vertices, edges packed as a bitmask over
/// the C(m, 2) vertex pairs in (0,1), (0,2), ..., (m-2,m-1) order.
class SmallGraph {
 public:
  static constexpr std::size_t kMaxVertices = 5;

  SmallGraph(std::size_t m, std::uint32_t mask) : m_(m), mask_(mask) {
    if (m < 1 || m > kMaxVertices) throw InvalidArgument("pattern graphs support 1 <= m <= 5 vertices");
    if (mask >> pair_count()) throw InvalidArgument("edge mask has bits beyond the vertex pairs");
  }

  static SmallGraph from_edges(std::size_t m, std::initializer_list<std::pair<std::size_t, std::size_t>> edges) {
    SmallGraph g(m, 0);
    for (auto [i, j] : edges) {
      if (i == j || i >= m || j >= m) throw InvalidArgument("invalid pattern edge");
      g.mask_ |= std::uint32_t{1} << pair_index(m, i, j);
    }
    return g;
  }
  static SmallGraph complete(std::size_t m) {
    SmallGraph g(m, 0);
    g.mask_ = (std::uint32_t{1} << g.pair_count()) - 1;
    return g;
  }
  static SmallGraph empty(std::size_t m) { return SmallGraph(m, 0); }
  static SmallGraph path(std::size_t m) {
    SmallGraph g(m, 0);
    for (std::size_t i = 0; i + 1 < m; ++i) g.mask_ |= std::uint32_t{1} << pair_index(m, i, i + 1);
    return g;
  }

  std::size_t vertices() const noexcept { return m_; }
  std::uint32_t mask() const noexcept { return mask_; }
  std::size_t pair_count() const noexcept { return m_ * (m_ - 1) / 2; }
  std::size_t edge_count() const noexcept { return static_cast<std::size_t>(std::popcount(mask_)); }
  bool is_complete() const noexcept { return edge_count() == pair_count(); }
  bool edge(std::size_t i, std::size_t j) const noexcept {
    return i != j && ((mask_ >> pair_index(m_, i, j)) & 1U);
  }

  static std::size_t pair_index(std::size_t m, std::size_t i, std::size_t j) noexcept {
    if (i > j) std::swap(i, j);
    return i * (2 * m - i - 1) / 2 + (j - i - 1);
  }

  /// Mask of the graph relabelled by vertex k -> perm[k].
  std::uint32_t relabel(const std::array<std::size_t, kMaxVertices>& perm) const noexcept {
    std::uint32_t out = 0;
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = i + 1; j < m_; ++j)
        if (edge(i, j)) out |= std::uint32_t{1} << pair_index(m_, perm[i], perm[j]);
    return out;
  }

  /// Distinct labelled graphs on {0..m-1} isomorphic to this one, sorted.
  std::vector<std::uint32_t> isomorphic_copies() const {
    std::array<std::size_t, kMaxVertices> perm{};
    std::iota(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m_), std::size_t{0});
    std::vector<std::uint32_t> out;
    do {
      out.push_back(relabel(perm));
    } while (std::next_permutation(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m_)));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Number of vertex permutations mapping the graph onto itself.
  std::size_t automorphism_count() const {
    std::array<std::size_t, kMaxVertices> perm{};
    std::iota(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m_), std::size_t{0});
    std::size_t count = 0;
    do {
      if (relabel(perm) == mask_) ++count;
    } while (std::next_permutation(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m_)));
    return count;
  }

  friend bool operator==(const SmallGraph&, const SmallGraph&) = default;

 private:
  std::size_t m_;
  std::uint32_t mask_;
};

}  // namespace rdpgboot
