#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bootstrap_sample.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "small_graph.hpp"
#include "spectral.hpp"

namespace rdpgboot {

using Point = std::span<const double>;

/// Symmetric kernel of m latent-position arguments.
struct KernelSpec {
  static constexpr std::size_t kMaxArity = 5;

  std::string name;
  std::size_t m = 0;
  std::size_t d = 0;
  std::function<double(std::span<const Point>)> eval;
  /// Invariant under a common orthogonal transform of all arguments; required
  /// for use with spectral estimates.
  bool rotation_invariant = false;
  /// r with h(a x_1, ..., a x_m) = a^r h(x_1, ..., x_m), when it exists.
  std::optional<double> homogeneity_degree;

  double operator()(std::span<const Point> args) const { return eval(args); }
};

inline double dot(Point x, Point y) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

/// h(x, y) = 2 x^T y; its U-statistic is the expected normalized average degree.
inline KernelSpec kernel_avg_degree(std::size_t d = 1) {
  return {"avg-degree", 2, d, [](std::span<const Point> a) { return 2.0 * dot(a[0], a[1]); }, true, 2.0};
}

/// Conditional probability that m vertices with the given positions induce a
/// copy of R: the sum over the distinct labelled copies R' of R of
/// prod_{k<l} p_kl^{R'_kl} (1 - p_kl)^{1 - R'_kl}, with p_kl = x_k^T x_l.
/// Equivalently (1/|Aut R|) times the sum over all m! relabellings.
inline KernelSpec kernel_subgraph(const SmallGraph& pattern, std::size_t d = 1) {
  const std::size_t m = pattern.vertices();
  if (m < 2) throw InvalidArgument("subgraph kernels need at least 2 vertices");
  const std::vector<std::uint32_t> copies = pattern.isomorphic_copies();
  const std::size_t pairs = pattern.pair_count();
  KernelSpec k;
  k.name = "subgraph";
  k.m = m;
  k.d = d;
  k.rotation_invariant = true;
  if (pattern.is_complete()) k.homogeneity_degree = 2.0 * static_cast<double>(pattern.edge_count());
  k.eval = [copies, pairs, m](std::span<const Point> a) {
    std::array<double, 10> p{};
    std::size_t idx = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) p[idx++] = dot(a[i], a[j]);
    double total = 0.0;
    for (std::uint32_t mask : copies) {
      double term = 1.0;
      for (std::size_t q = 0; q < pairs; ++q) term *= ((mask >> q) & 1U) ? p[q] : 1.0 - p[q];
      total += term;
    }
    return total;
  };
  return k;
}

inline KernelSpec kernel_triangle(std::size_t d = 1) {
  KernelSpec k = kernel_subgraph(SmallGraph::complete(3), d);
  k.name = "triangle";
  return k;
}

/// Two-sample maximum mean discrepancy over labelled latent positions:
///   sum_{I1, i != j} kappa / (n1 (n1 - 1)) + sum_{I2, i != j} kappa / (n2 (n2 - 1))
///   - cross_factor * sum_{I1 x I2} kappa / (n1 n2).
/// cross_factor = 2 is the conventional MMD (zero for identical samples);
/// cross_factor = 1 reproduces the three-term display without the factor.
struct MmdStatistic {
  std::function<double(Point, Point)> kappa;
  std::vector<int> labels;  // 1 for group I1, 0 for group I2
  double cross_factor = 2.0;

  double operator()(const LatentConfiguration& x) const {
    if (x.n() != labels.size()) throw DimensionError("one label per vertex required");
    double s1 = 0.0, s2 = 0.0, s12 = 0.0;
    std::size_t n1 = 0;
    for (int l : labels) n1 += (l == 1);
    const std::size_t n2 = labels.size() - n1;
    for (std::size_t i = 0; i < x.n(); ++i)
      for (std::size_t j = i + 1; j < x.n(); ++j) {
        const double k = kappa(x.row(i), x.row(j));
        if (labels[i] == 1 && labels[j] == 1) s1 += 2.0 * k;
        else if (labels[i] != 1 && labels[j] != 1) s2 += 2.0 * k;
        else s12 += k;
      }
    const double a = static_cast<double>(n1), b = static_cast<double>(n2);
    return s1 / (a * (a - 1.0)) + s2 / (b * (b - 1.0)) - cross_factor * s12 / (a * b);
  }
};

inline MmdStatistic kernel_mmd(std::function<double(Point, Point)> kappa, std::vector<int> labels,
                               double cross_factor = 2.0) {
  std::size_t n1 = 0;
  for (int l : labels) n1 += (l == 1);
  if (n1 < 2 || labels.size() - n1 < 2) throw InvalidArgument("MMD needs at least 2 members per group");
  return {std::move(kappa), std::move(labels), cross_factor};
}

/// n^{-4} sum_{i,j,k,l} X_i^T X_k (X_i - X_j)^T X_l, the conditional
/// expectation of the degree variance, in O(n d): with s = sum_l X_l and
/// a_i = X_i^T s it equals n^{-4} (n sum a_i^2 - (sum a_i)^2).
inline double degree_variance_vstat(const LatentConfiguration& x) {
  if (x.n() < 2) throw InvalidArgument("degree_variance_vstat requires n >= 2");
  const Eigen::VectorXd s = x.positions().colwise().sum().transpose();
  const Eigen::VectorXd a = x.positions() * s;
  const double n = static_cast<double>(x.n());
  return (n * a.squaredNorm() - a.sum() * a.sum()) / (n * n * n * n);
}

// ---------------------------------------------------------------------------
// Evaluation

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

/// Calls fn(span of m strictly increasing indices) for every m-subset of
/// {0..n-1} in lexicographic order.
template <typename Fn>
void for_each_combination(std::size_t n, std::size_t m, Fn&& fn) {
  if (m == 0 || m > n) return;
  std::array<std::size_t, KernelSpec::kMaxArity> c{};
  for (std::size_t i = 0; i < m; ++i) c[i] = i;
  while (true) {
    fn(std::span<const std::size_t>(c.data(), m));
    std::size_t i = m;
    while (i > 0 && c[i - 1] == n - m + (i - 1)) --i;
    if (i == 0) return;
    ++c[i - 1];
    for (std::size_t j = i; j < m; ++j) c[j] = c[j - 1] + 1;
  }
}

struct ExactEval {};
struct MonteCarloEval {
  std::size_t samples = 1000;
};
using EvalMode = std::variant<ExactEval, MonteCarloEval>;

struct UStatResult {
  double value = 0.0;
  std::size_t m = 0;
  EvalMode mode = ExactEval{};
  double tuples = 0.0;
};

inline constexpr double kDefaultTupleBudget = 2e7;

/// Exact when C(n, m) fits the budget, Monte Carlo with `samples` otherwise.
inline EvalMode choose_mode(std::size_t n, std::size_t m, std::size_t samples, double budget = kDefaultTupleBudget) {
  if (binomial(n, m) <= budget) return ExactEval{};
  return MonteCarloEval{samples};
}

namespace detail {

inline void check_kernel(const KernelSpec& h, const LatentConfiguration& x) {
  if (h.m < 1 || h.m > KernelSpec::kMaxArity) throw InvalidArgument("kernel arity must be in [1, 5]");
  if (x.n() < h.m) throw InvalidArgument("need at least m latent positions");
  if (h.d != x.d()) throw DimensionError("kernel dimension does not match latent dimension");
}

inline double eval_tuple(const KernelSpec& h, const LatentConfiguration& x, std::span<const std::size_t> idx) {
  std::array<Point, KernelSpec::kMaxArity> pts;
  for (std::size_t k = 0; k < idx.size(); ++k) pts[k] = x.row(idx[k]);
  return h(std::span<const Point>(pts.data(), idx.size()));
}

// Uniform m-subset of {0..n-1} \ {exclude}, sorted; rejection on repeats.
inline void sample_tuple(std::size_t n, std::size_t m, SeededRng& rng, std::span<std::size_t> out,
                         std::size_t exclude = static_cast<std::size_t>(-1)) {
  while (true) {
    bool ok = true;
    for (std::size_t k = 0; k < m && ok; ++k) {
      out[k] = static_cast<std::size_t>(rng.index(n));
      if (out[k] == exclude) ok = false;
      for (std::size_t j = 0; j < k && ok; ++j)
        if (out[j] == out[k]) ok = false;
    }
    if (ok) break;
  }
  std::sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(m));
}

}  // namespace detail

/// Mean of h over all C(n, m) strictly increasing index tuples.
inline UStatResult ustat_exact(const KernelSpec& h, const LatentConfiguration& x,
                               double budget = kDefaultTupleBudget) {
  detail::check_kernel(h, x);
  const double tuples = binomial(x.n(), h.m);
  if (tuples > budget) throw BudgetError(tuples, budget);
  double sum = 0.0;
  for_each_combination(x.n(), h.m, [&](std::span<const std::size_t> c) { sum += detail::eval_tuple(h, x, c); });
  return {sum / tuples, h.m, ExactEval{}, tuples};
}

/// Mean of h over `samples` tuples drawn uniformly with replacement from the
/// m-subsets of {0..n-1}.
inline UStatResult ustat_mc(const KernelSpec& h, const LatentConfiguration& x, std::size_t samples, SeededRng& rng) {
  detail::check_kernel(h, x);
  if (samples < 1) throw InvalidArgument("Monte Carlo sample count must be >= 1");
  std::array<std::size_t, KernelSpec::kMaxArity> c{};
  double sum = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    detail::sample_tuple(x.n(), h.m, rng, c);
    sum += detail::eval_tuple(h, x, std::span<const std::size_t>(c.data(), h.m));
  }
  return {sum / static_cast<double>(samples), h.m, MonteCarloEval{samples}, static_cast<double>(samples)};
}

struct UStatOptions {
  EvalMode mode = ExactEval{};
  double exact_budget = kDefaultTupleBudget;
  std::uint64_t seed = 0;  // Monte Carlo stream
  unsigned threads = 1;
};

inline UStatResult evaluate_ustat(const KernelSpec& h, const LatentConfiguration& x, const UStatOptions& opts = {}) {
  if (const auto* mc = std::get_if<MonteCarloEval>(&opts.mode)) {
    SeededRng rng(opts.seed, 0x05ca1eULL);
    return ustat_mc(h, x, mc->samples, rng);
  }
  return ustat_exact(h, x, opts.exact_budget);
}

/// U-statistic of h over ASE(a, d) with diagonal augmentation.
inline UStatResult plug_in_ustat(const AdjacencyMatrix& a, std::size_t d, const KernelSpec& h,
                                 const UStatOptions& opts = {}) {
  if (!h.rotation_invariant)
    throw InvalidArgument("plug-in U-statistics need a rotation-invariant kernel");
  return evaluate_ustat(h, ase(a, d, true), opts);
}

/// Per-vertex averages used by the additive bootstrap:
///   U~_i = C(n-1, m-1)^{-1} sum_{c : i in c} h(X_c),
/// so that n^{-1} sum_i W_i U~_i equals the weighted U-statistic with tuple
/// weights (W_{i_1} + ... + W_{i_m}) / m. Monte Carlo mode averages h over
/// `samples` uniformly drawn tuples containing i, using stream rng.child(i).
inline std::vector<double> precompute_utilde(const KernelSpec& h, const LatentConfiguration& x, const EvalMode& mode,
                                             const SeededRng& rng, double budget = kDefaultTupleBudget,
                                             unsigned threads = 1) {
  detail::check_kernel(h, x);
  const std::size_t n = x.n();
  std::vector<double> out(n, 0.0);
  if (const auto* mc = std::get_if<MonteCarloEval>(&mode)) {
    if (mc->samples < 1) throw InvalidArgument("Monte Carlo sample count must be >= 1");
    if (h.m == 1) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c[1] = {i};
        out[i] = detail::eval_tuple(h, x, c);
      }
      return out;
    }
    parallel_for(n, threads, [&](std::size_t i) {
      SeededRng r = rng.child(i);
      std::array<std::size_t, KernelSpec::kMaxArity> c{};
      double sum = 0.0;
      for (std::size_t s = 0; s < mc->samples; ++s) {
        detail::sample_tuple(n, h.m - 1, r, std::span<std::size_t>(c.data() + 1, h.m - 1), i);
        c[0] = i;
        sum += detail::eval_tuple(h, x, std::span<const std::size_t>(c.data(), h.m));
      }
      out[i] = sum / static_cast<double>(mc->samples);
    });
    return out;
  }
  const double tuples = binomial(n, h.m);
  if (tuples > budget) throw BudgetError(tuples, budget);
  for_each_combination(n, h.m, [&](std::span<const std::size_t> c) {
    const double v = detail::eval_tuple(h, x, c);
    for (std::size_t i : c) out[i] += v;
  });
  const double per_vertex = binomial(n - 1, h.m - 1);
  for (double& v : out) v /= per_vertex;
  return out;
}

// ---------------------------------------------------------------------------
// Weighted bootstraps

enum class WeightScheme { EfronProduct, Additive };

inline const char* to_string(WeightScheme s) {
  return s == WeightScheme::EfronProduct ? "efron" : "additive";
}

/// W ~ Multinomial(n, (1/n, ..., 1/n)).
inline std::vector<double> multinomial_weights(std::size_t n, SeededRng& rng) {
  std::vector<double> w(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) w[rng.index(n)] += 1.0;
  return w;
}

/// Additive-scheme replicate from precomputed U~ and one weight draw.
///
/// raw = n^{-1} sum_i W_i U~_i is the weighted U-statistic with tuple weights
/// sum_k W_{i_k} / m. Its spread about U_n is 1/m of the U-statistic's own
/// (it averages m per-vertex fluctuations), so the replicate rescales the
/// deviation by m and by 1 / sqrt(1 - 1/n) for the multinomial weight
/// variance: U* = U_n + m (raw - U_n) / sqrt(1 - 1/n). Unit weights give U_n.
inline double additive_replicate(std::span<const double> utilde, double u_n, std::span<const double> w, std::size_t m) {
  const double n = static_cast<double>(utilde.size());
  double raw = 0.0;
  for (std::size_t i = 0; i < utilde.size(); ++i) raw += w[i] * utilde[i];
  raw /= n;
  return u_n + static_cast<double>(m) * (raw - u_n) / std::sqrt(1.0 - 1.0 / n);
}

/// Largest additive tuple weight sum_k W_{i_k} / (m sqrt(1 - 1/n)).
inline double max_additive_weight(std::vector<double> w, std::size_t m) {
  const std::size_t top = std::min(m, w.size());
  std::partial_sort(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(top), w.end(), std::greater<>());
  const double s = std::accumulate(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(top), 0.0);
  return s / (static_cast<double>(m) * std::sqrt(1.0 - 1.0 / static_cast<double>(w.size())));
}

struct BootstrapOptions {
  EvalMode mode = ExactEval{};
  double exact_budget = kDefaultTupleBudget;
  unsigned threads = 1;
};

/// B weighted-bootstrap replicates of the U-statistic of h over x.
///
/// Additive: U~ is computed once and each replicate costs O(n).
/// EfronProduct: tuple weights prod_k W_{i_k}; exact mode reweights all
/// C(n, m) tuples, Monte Carlo mode reweights one fixed uniform tuple sample.
/// Replicate k draws its weights from rng.child(k).
inline BootstrapSample bootstrap_ustat(const KernelSpec& h, const LatentConfiguration& x, WeightScheme scheme,
                                       std::size_t replicates, const SeededRng& rng,
                                       const BootstrapOptions& opts = {}) {
  detail::check_kernel(h, x);
  const std::size_t n = x.n();
  BootstrapSample out;
  out.method = std::string("ustat-") + to_string(scheme);
  out.seed = rng.master_seed();
  out.values.assign(replicates, 0.0);
  std::vector<double> max_weight(replicates, 0.0);

  if (scheme == WeightScheme::Additive) {
    const std::vector<double> utilde = precompute_utilde(h, x, opts.mode, rng.child(~0ULL), opts.exact_budget, opts.threads);
    const double u_n = std::accumulate(utilde.begin(), utilde.end(), 0.0) / static_cast<double>(n);
    out.observed = u_n;
    parallel_for(replicates, opts.threads, [&](std::size_t k) {
      SeededRng r = rng.child(k);
      const std::vector<double> w = multinomial_weights(n, r);
      out.values[k] = additive_replicate(utilde, u_n, w, h.m);
      max_weight[k] = max_additive_weight(w, h.m);
    });
  } else {
    // Tuple list and kernel values, shared across replicates.
    std::vector<std::size_t> tuples;
    std::vector<double> values;
    if (const auto* mc = std::get_if<MonteCarloEval>(&opts.mode)) {
      SeededRng tr = rng.child(~0ULL);
      tuples.resize(mc->samples * h.m);
      values.resize(mc->samples);
      for (std::size_t s = 0; s < mc->samples; ++s) {
        std::span<std::size_t> c(tuples.data() + s * h.m, h.m);
        detail::sample_tuple(n, h.m, tr, c);
        values[s] = detail::eval_tuple(h, x, c);
      }
    } else {
      const double count = binomial(n, h.m);
      if (count > opts.exact_budget) throw BudgetError(count, opts.exact_budget);
      tuples.reserve(static_cast<std::size_t>(count) * h.m);
      values.reserve(static_cast<std::size_t>(count));
      for_each_combination(n, h.m, [&](std::span<const std::size_t> c) {
        tuples.insert(tuples.end(), c.begin(), c.end());
        values.push_back(detail::eval_tuple(h, x, c));
      });
    }
    const double count = static_cast<double>(values.size());
    out.observed = std::accumulate(values.begin(), values.end(), 0.0) / count;
    parallel_for(replicates, opts.threads, [&](std::size_t k) {
      SeededRng r = rng.child(k);
      const std::vector<double> w = multinomial_weights(n, r);
      double sum = 0.0, wmax = 0.0;
      for (std::size_t s = 0; s < values.size(); ++s) {
        double wc = 1.0;
        for (std::size_t j = 0; j < h.m; ++j) wc *= w[tuples[s * h.m + j]];
        sum += wc * values[s];
        wmax = std::max(wmax, wc);
      }
      out.values[k] = sum / count;
      max_weight[k] = wmax;
    });
  }
  out.max_tuple_weight = replicates ? *std::max_element(max_weight.begin(), max_weight.end()) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Sparse regime

/// Edge density C(n, 2)^{-1} sum_{i<j} A_ij.
inline double rho_hat(const AdjacencyMatrix& a) {
  if (a.size() < 2) throw InvalidArgument("rho_hat requires n >= 2");
  return static_cast<double>(a.edge_count()) / binomial(a.size(), 2);
}

struct NormalizedDensity {
  double value = 0.0;    // density / rho_hat^{|E(R)|}
  double density = 0.0;  // plug-in subgraph density
  double rho_hat = 0.0;
};

/// Plug-in density of R rescaled by rho_hat^{|E(R)|}.
inline NormalizedDensity normalized_subgraph_density(const AdjacencyMatrix& a, std::size_t d, const SmallGraph& pattern,
                                                     const UStatOptions& opts = {}) {
  const double rho = rho_hat(a);
  if (rho <= 0.0) throw InvalidArgument("normalized density undefined on an empty graph");
  const double density = plug_in_ustat(a, d, kernel_subgraph(pattern, d), opts).value;
  return {density / std::pow(rho, static_cast<double>(pattern.edge_count())), density, rho};
}

}  // namespace rdpgboot
