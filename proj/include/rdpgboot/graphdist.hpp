#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "assignment.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "spectral.hpp"
#include "ustat.hpp"

namespace rdpgboot {

/// Outcome of aligning a2 to a1. permutation[i] is the vertex of a2 matched
/// to vertex i of a1, and
///   distance = C(n, 2)^{-1} #{i < j : a1(i, j) != a2(perm[i], perm[j])}.
struct MatchResult {
  double distance = 0.0;
  std::vector<std::size_t> permutation;
  bool exact = false;
};

inline std::size_t disagreements(const AdjacencyMatrix& a1, const AdjacencyMatrix& a2,
                                 std::span<const std::size_t> perm) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < a1.size(); ++i)
    for (std::size_t j = i + 1; j < a1.size(); ++j) count += a1(i, j) != a2(perm[i], perm[j]);
  return count;
}

namespace detail {

inline void check_same_order(const AdjacencyMatrix& a1, const AdjacencyMatrix& a2) {
  if (a1.size() != a2.size()) throw DimensionError("graphs must have the same number of vertices");
}

inline double pair_normalizer(std::size_t n) { return n < 2 ? 1.0 : binomial(n, 2); }

}  // namespace detail

/// Graph matching distance by exhaustive search over all n! alignments
/// (depth-first with pruning on the partial disagreement count); n <= 9.
inline MatchResult gm_distance_exact(const AdjacencyMatrix& a1, const AdjacencyMatrix& a2) {
  detail::check_same_order(a1, a2);
  const std::size_t n = a1.size();
  if (n > 9) throw InvalidArgument("exact graph matching is limited to n <= 9");
  std::vector<std::size_t> best(n), perm(n);
  std::iota(best.begin(), best.end(), std::size_t{0});
  std::size_t best_cost = disagreements(a1, a2, best);
  std::vector<char> used(n, 0);

  auto search = [&](auto&& self, std::size_t k, std::size_t cost) -> void {
    if (cost >= best_cost) return;
    if (k == n) {
      best_cost = cost;
      best = perm;
      return;
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (used[v]) continue;
      std::size_t added = 0;
      for (std::size_t j = 0; j < k; ++j) added += a1(j, k) != a2(perm[j], v);
      used[v] = 1;
      perm[k] = v;
      self(self, k + 1, cost + added);
      used[v] = 0;
    }
  };
  search(search, 0, 0);
  return {static_cast<double>(best_cost) / detail::pair_normalizer(n), std::move(best), true};
}

struct ApproxMatchOptions {
  std::size_t restarts = 1;
  std::size_t max_iterations = 50;
  double tolerance = 1e-9;
  bool polish = true;  // transposition local search on each candidate permutation
};

namespace detail {

// Sinkhorn balancing to a doubly stochastic matrix.
inline Eigen::MatrixXd sinkhorn(Eigen::MatrixXd k, int iterations = 200) {
  for (int it = 0; it < iterations; ++it) {
    k.array().colwise() /= k.rowwise().sum().array();
    k.array().rowwise() /= k.colwise().sum().array();
  }
  return k;
}

// First-improvement local search over transpositions of perm; each sweep
// tries every pair (i, j) and keeps a swap when it lowers the disagreement
// count. Returns the final count.
inline std::size_t polish_swaps(const AdjacencyMatrix& a1, const AdjacencyMatrix& a2, std::vector<std::size_t>& perm,
                                std::size_t cost) {
  const std::size_t n = perm.size();
  bool improved = true;
  while (improved && cost > 0) {
    improved = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        // Change in disagreements when perm[i] and perm[j] trade places.
        long delta = 0;
        const std::size_t pi = perm[i], pj = perm[j];
        for (std::size_t k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          const std::size_t pk = perm[k];
          delta += (a1(i, k) != a2(pj, pk)) - (a1(i, k) != a2(pi, pk));
          delta += (a1(j, k) != a2(pi, pk)) - (a1(j, k) != a2(pj, pk));
        }
        if (delta < 0) {
          std::swap(perm[i], perm[j]);
          cost -= static_cast<std::size_t>(-delta);
          improved = true;
        }
      }
  }
  return cost;
}

}  // namespace detail

/// Upper bound on the graph matching distance by Frank-Wolfe on the relaxed
/// quadratic assignment problem max trace(A1 P A2 P^T) over doubly stochastic
/// P (the FAQ approach), with exact line search on the quadratic objective.
/// Restart 0 starts from the barycenter J/n, later restarts from
/// (J/n + K)/2 for a random doubly stochastic K. Within a restart every
/// permutation visited (Frank-Wolfe vertices and the rounded final iterate)
/// is scored; the best of them is refined by transposition local search and
/// competes with the other restarts and the identity.
inline MatchResult gm_distance_approx(const AdjacencyMatrix& a1, const AdjacencyMatrix& a2,
                                      const ApproxMatchOptions& opts, const SeededRng& rng) {
  detail::check_same_order(a1, a2);
  const std::size_t n = a1.size();
  const auto en = static_cast<Eigen::Index>(n);
  MatchResult best{0.0, std::vector<std::size_t>(n), false};
  std::iota(best.permutation.begin(), best.permutation.end(), std::size_t{0});
  std::size_t best_cost = disagreements(a1, a2, best.permutation);

  // Best permutation of the current restart; polished before it competes
  // with the overall best.
  std::vector<std::size_t> local;
  std::size_t local_cost = 0;
  auto consider = [&](const std::vector<std::size_t>& perm) {
    const std::size_t c = disagreements(a1, a2, perm);
    if (local.empty() || c < local_cost) {
      local_cost = c;
      local = perm;
    }
  };

  if (n >= 2 && best_cost > 0) {
    const Eigen::MatrixXd m1 = to_dense(a1);
    const Eigen::MatrixXd m2 = to_dense(a2);
    const Eigen::MatrixXd bary = Eigen::MatrixXd::Constant(en, en, 1.0 / static_cast<double>(n));
    for (std::size_t r = 0; r < std::max<std::size_t>(1, opts.restarts) && best_cost > 0; ++r) {
      Eigen::MatrixXd p = bary;
      if (r > 0) {
        SeededRng stream = rng.child(r);
        Eigen::MatrixXd k(en, en);
        for (Eigen::Index i = 0; i < en; ++i)
          for (Eigen::Index j = 0; j < en; ++j) k(i, j) = stream.uniform() + 1e-12;
        p = 0.5 * (bary + detail::sinkhorn(std::move(k)));
      }
      Eigen::MatrixXd g = m1 * p * m2;  // half the gradient of trace(A1 P A2 P^T)
      for (std::size_t it = 0; it < opts.max_iterations; ++it) {
        const Assignment dir = solve_assignment(-g);
        consider(dir.column);
        Eigen::MatrixXd qa2(en, en);  // Q A2: row i of A2 permuted to q_i
        for (Eigen::Index i = 0; i < en; ++i) qa2.row(i) = m2.row(static_cast<Eigen::Index>(dir.column[static_cast<std::size_t>(i)]));
        const Eigen::MatrixXd gq = m1 * qa2;  // A1 Q A2
        // f(P + t R) = f(P) + t b + t^2 a with R = Q - P.
        double g_dot_q = 0.0;
        for (Eigen::Index i = 0; i < en; ++i) g_dot_q += g(i, static_cast<Eigen::Index>(dir.column[static_cast<std::size_t>(i)]));
        const double g_dot_p = (g.array() * p.array()).sum();
        const double b = 2.0 * (g_dot_q - g_dot_p);
        double gq_dot_q = 0.0;
        for (Eigen::Index i = 0; i < en; ++i) gq_dot_q += gq(i, static_cast<Eigen::Index>(dir.column[static_cast<std::size_t>(i)]));
        const double gq_dot_p = (gq.array() * p.array()).sum();
        const double a = gq_dot_q - gq_dot_p - g_dot_q + g_dot_p;
        double t;
        if (a < 0.0) t = std::clamp(-b / (2.0 * a), 0.0, 1.0);
        else t = (a + b > 0.0) ? 1.0 : 0.0;
        const double gain = t * b + t * t * a;
        if (t <= 0.0 || gain <= opts.tolerance * std::max(1.0, g_dot_p)) break;
        for (Eigen::Index i = 0; i < en; ++i) {
          p.row(i) *= (1.0 - t);
          p(i, static_cast<Eigen::Index>(dir.column[static_cast<std::size_t>(i)])) += t;
        }
        g = (1.0 - t) * g + t * gq;
      }
      consider(solve_assignment(-p).column);
      if (opts.polish) local_cost = detail::polish_swaps(a1, a2, local, local_cost);
      if (local_cost < best_cost) {
        best_cost = local_cost;
        best.permutation = local;
      }
      local.clear();
    }
  }
  best.distance = static_cast<double>(best_cost) / detail::pair_normalizer(n);
  return best;
}

inline MatchResult gm_distance_approx(const AdjacencyMatrix& a1, const AdjacencyMatrix& a2, std::size_t restarts = 1,
                                      std::uint64_t seed = 0) {
  return gm_distance_approx(a1, a2, ApproxMatchOptions{restarts}, SeededRng(seed));
}

/// Estimate of the 1-Wasserstein distance between two graph distributions
/// from equal-size samples: the mean cost of the optimal one-to-one matching
/// of samples under approximate graph matching distances.
inline double empirical_wasserstein(std::span<const AdjacencyMatrix> samples1, std::span<const AdjacencyMatrix> samples2,
                                    const ApproxMatchOptions& opts = {}, const SeededRng& rng = SeededRng(0),
                                    unsigned threads = 1) {
  if (samples1.size() != samples2.size()) throw DimensionError("sample lists must have equal length");
  const std::size_t l = samples1.size();
  if (l == 0) throw InvalidArgument("sample lists must be non-empty");
  for (std::size_t i = 0; i < l; ++i)
    if (samples1[i].size() != samples1[0].size() || samples2[i].size() != samples1[0].size())
      throw DimensionError("all graphs must have the same number of vertices");
  Eigen::MatrixXd cost(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l));
  parallel_for(l * l, threads, [&](std::size_t k) {
    const std::size_t i = k / l, j = k % l;
    cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        gm_distance_approx(samples1[i], samples2[j], opts, rng.child(k)).distance;
  });
  return solve_assignment(cost).cost / static_cast<double>(l);
}

}  // namespace rdpgboot
