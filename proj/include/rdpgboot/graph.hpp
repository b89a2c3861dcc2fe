#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"

namespace rdpgboot {

/// Symmetric binary adjacency matrix with zero diagonal.
///
/// Rows are stored as packed 64-bit words so neighbourhood intersections and
/// BFS frontiers are word operations. Every mutator keeps both triangles in
/// sync; there is no way to set a diagonal entry.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

  static AdjacencyMatrix complete(std::size_t n) {
    AdjacencyMatrix a(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) a.add_edge(i, j);
    return a;
  }

  static AdjacencyMatrix from_edges(std::size_t n,
                                    std::span<const std::pair<std::size_t, std::size_t>> edges) {
    AdjacencyMatrix a(n);
    for (auto [i, j] : edges) a.add_edge(i, j);
    return a;
  }

  static AdjacencyMatrix from_edges(std::size_t n, std::initializer_list<std::pair<std::size_t, std::size_t>> edges) {
    return from_edges(n, std::span<const std::pair<std::size_t, std::size_t>>(edges.begin(), edges.size()));
  }

  std::size_t size() const noexcept { return n_; }

  bool operator()(std::size_t i, std::size_t j) const noexcept {
    return (bits_[i * words_ + (j >> 6)] >> (j & 63)) & 1U;
  }

  void set_edge(std::size_t i, std::size_t j, bool present) {
    if (i == j) throw InvalidArgument("self-loops are not representable");
    if (i >= n_ || j >= n_) throw InvalidArgument("vertex index out of range");
    set_bit(i, j, present);
    set_bit(j, i, present);
  }
  void add_edge(std::size_t i, std::size_t j) { set_edge(i, j, true); }

  std::span<const std::uint64_t> row_bits(std::size_t i) const noexcept {
    return {bits_.data() + i * words_, words_};
  }
  std::size_t words_per_row() const noexcept { return words_; }

  std::size_t degree(std::size_t i) const noexcept {
    std::size_t d = 0;
    for (std::uint64_t w : row_bits(i)) d += static_cast<std::size_t>(std::popcount(w));
    return d;
  }

  std::size_t edge_count() const noexcept {
    std::size_t total = 0;
    for (std::uint64_t w : bits_) total += static_cast<std::size_t>(std::popcount(w));
    return total / 2;
  }

  std::vector<std::uint32_t> neighbors(std::size_t i) const {
    std::vector<std::uint32_t> out;
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t word = bits_[i * words_ + w];
      while (word) {
        out.push_back(static_cast<std::uint32_t>(w * 64 + std::countr_zero(word)));
        word &= word - 1;
      }
    }
    return out;
  }

  /// Relabelled copy B with B(i, j) = A(perm[i], perm[j]).
  AdjacencyMatrix permuted(std::span<const std::size_t> perm) const {
    AdjacencyMatrix b(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        if ((*this)(perm[i], perm[j])) b.add_edge(i, j);
    return b;
  }

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

 private:
  void set_bit(std::size_t i, std::size_t j, bool v) {
    std::uint64_t& w = bits_[i * words_ + (j >> 6)];
    const std::uint64_t mask = std::uint64_t{1} << (j & 63);
    w = v ? (w | mask) : (w & ~mask);
  }

  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Canonical edge list: 0-indexed pairs with i < j, sorted lexicographically.
struct EdgeList {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  friend bool operator==(const EdgeList&, const EdgeList&) = default;
};

inline EdgeList to_edge_list(const AdjacencyMatrix& a) {
  EdgeList out{a.size(), {}};
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::uint32_t j : a.neighbors(i))
      if (j > i) out.edges.emplace_back(i, j);
  return out;
}

inline AdjacencyMatrix from_edge_list(const EdgeList& list) {
  return AdjacencyMatrix::from_edges(list.n, list.edges);
}

/// All-pairs hop counts. Unreachable pairs hold `kUnreachable`, which is
/// never a valid hop count; consumers must test for it explicitly.
class HopMatrix {
 public:
  static constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

  explicit HopMatrix(std::size_t n) : n_(n), d_(n * n, kUnreachable) {}
  std::size_t size() const noexcept { return n_; }
  std::uint32_t operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }
  std::uint32_t& at(std::size_t i, std::size_t j) noexcept { return d_[i * n_ + j]; }
  static bool finite(std::uint32_t h) noexcept { return h != kUnreachable; }

 private:
  std::size_t n_;
  std::vector<std::uint32_t> d_;
};

namespace detail {

// Level-synchronous BFS over packed rows. Calls visit(vertex, depth) for each
// reached vertex, source included at depth 0.
template <typename Visit>
void bfs_bits(const AdjacencyMatrix& a, std::size_t source, Visit&& visit) {
  const std::size_t words = a.words_per_row();
  std::vector<std::uint64_t> seen(words, 0), frontier(words, 0), next(words, 0);
  seen[source >> 6] |= std::uint64_t{1} << (source & 63);
  frontier[source >> 6] |= std::uint64_t{1} << (source & 63);
  visit(source, 0U);
  std::uint32_t depth = 0;
  bool any = true;
  while (any) {
    ++depth;
    std::fill(next.begin(), next.end(), 0);
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t word = frontier[w];
      while (word) {
        const std::size_t v = w * 64 + static_cast<std::size_t>(std::countr_zero(word));
        word &= word - 1;
        const auto row = a.row_bits(v);
        for (std::size_t k = 0; k < words; ++k) next[k] |= row[k];
      }
    }
    any = false;
    for (std::size_t w = 0; w < words; ++w) {
      next[w] &= ~seen[w];
      seen[w] |= next[w];
      std::uint64_t word = next[w];
      if (word) any = true;
      while (word) {
        visit(w * 64 + static_cast<std::size_t>(std::countr_zero(word)), depth);
        word &= word - 1;
      }
    }
    frontier.swap(next);
  }
}

}  // namespace detail

inline bool is_connected(const AdjacencyMatrix& a) {
  if (a.size() == 0) throw InvalidArgument("is_connected requires n >= 1");
  std::size_t reached = 0;
  detail::bfs_bits(a, 0, [&](std::size_t, std::uint32_t) { ++reached; });
  return reached == a.size();
}

inline HopMatrix shortest_path_matrix(const AdjacencyMatrix& a) {
  HopMatrix d(a.size());
  for (std::size_t s = 0; s < a.size(); ++s)
    detail::bfs_bits(a, s, [&](std::size_t v, std::uint32_t depth) { d.at(s, v) = depth; });
  return d;
}

// ---------------------------------------------------------------------------
// Edge-list text format:
//   n <count>
//   i j
//   ...
// Blank lines and lines starting with '#' are ignored.

namespace detail {

inline bool parse_index(std::string_view tok, std::size_t& out) {
  if (tok.empty()) return false;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return res.ec == std::errc{} && res.ptr == tok.data() + tok.size();
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) toks.push_back(line.substr(start, i - start));
  }
  return toks;
}

}  // namespace detail

inline AdjacencyMatrix read_edge_list(std::string_view text) {
  std::size_t line_no = 0;
  bool have_header = false;
  AdjacencyMatrix a;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    const auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0].front() == '#') continue;
    if (!have_header) {
      std::size_t n = 0;
      if (toks.size() != 2 || toks[0] != "n" || !detail::parse_index(toks[1], n) || n == 0)
        throw ParseError(ParseErrorKind::MissingHeader, line_no, "expected header 'n <count>'");
      a = AdjacencyMatrix(n);
      have_header = true;
      continue;
    }
    std::size_t i = 0, j = 0;
    if (toks.size() != 2 || !detail::parse_index(toks[0], i) || !detail::parse_index(toks[1], j))
      throw ParseError(ParseErrorKind::Malformed, line_no, "expected two vertex indices");
    if (i >= a.size() || j >= a.size())
      throw ParseError(ParseErrorKind::IndexOutOfRange, line_no,
                       "vertex index out of range for n = " + std::to_string(a.size()));
    if (i == j) throw ParseError(ParseErrorKind::SelfLoop, line_no, "self-loop on vertex " + std::to_string(i));
    if (a(i, j))
      throw ParseError(ParseErrorKind::DuplicateEdge, line_no,
                       "duplicate edge " + std::to_string(i) + " " + std::to_string(j));
    a.add_edge(i, j);
  }
  if (!have_header) throw ParseError(ParseErrorKind::MissingHeader, line_no, "empty input");
  return a;
}

inline std::string write_edge_list(const AdjacencyMatrix& a) {
  std::ostringstream out;
  out << "n " << a.size() << '\n';
  for (const auto& [i, j] : to_edge_list(a).edges) out << i << ' ' << j << '\n';
  return out.str();
}

}  // namespace rdpgboot
