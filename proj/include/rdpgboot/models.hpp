#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "rng.hpp"
#include "spectral.hpp"

namespace rdpgboot {

// ---------------------------------------------------------------------------
// Latent position distributions

/// Scalar Beta(alpha, beta) latent positions (d = 1, support in [0, 1]).
struct BetaScalar {
  double alpha = 2.0;
  double beta = 3.0;
};

/// Uniform resampling of the rows of a fixed configuration.
struct EmpiricalLatents {
  LatentConfiguration rows;
};

/// Finite mixture of point masses.
struct PointMix {
  RowMatrix atoms;  // one atom per row
  std::vector<double> weights;
};

class LatentDistribution {
 public:
  using Kind = std::variant<BetaScalar, EmpiricalLatents, PointMix>;

  static LatentDistribution beta(double alpha, double beta) {
    if (!(alpha > 0) || !(beta > 0)) throw InvalidArgument("Beta parameters must be positive");
    return LatentDistribution(BetaScalar{alpha, beta});
  }

  /// Inner-product validity is not checked here; samplers clamp.
  static LatentDistribution empirical(LatentConfiguration rows) {
    if (rows.n() == 0) throw InvalidArgument("empirical distribution needs at least one row");
    return LatentDistribution(EmpiricalLatents{std::move(rows)});
  }

  static LatentDistribution point_mix(RowMatrix atoms, std::vector<double> weights) {
    if (atoms.rows() == 0 || atoms.cols() == 0) throw InvalidArgument("point mixture needs atoms");
    if (static_cast<std::size_t>(atoms.rows()) != weights.size())
      throw DimensionError("one weight per atom required");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw InvalidArgument("mixture weights must be non-negative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("mixture weights must sum to 1");
    const Eigen::MatrixXd g = atoms * atoms.transpose();
    if (g.minCoeff() < -1e-12 || g.maxCoeff() > 1.0 + 1e-12)
      throw InvalidArgument("atoms violate inner-product validity (x^T y outside [0,1])");
    return LatentDistribution(PointMix{std::move(atoms), std::move(weights)});
  }

  const Kind& kind() const noexcept { return kind_; }

  std::size_t d() const {
    return std::visit(
        [](const auto& k) -> std::size_t {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, BetaScalar>) return 1;
          else if constexpr (std::is_same_v<T, EmpiricalLatents>) return k.rows.d();
          else return static_cast<std::size_t>(k.atoms.cols());
        },
        kind_);
  }

  /// Largest inner product over the support; bounds rho for the sparse regime.
  double max_inner_product() const {
    return std::visit(
        [](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, BetaScalar>) return 1.0;
          else if constexpr (std::is_same_v<T, EmpiricalLatents>) return k.rows.gram().maxCoeff();
          else return (k.atoms * k.atoms.transpose()).maxCoeff();
        },
        kind_);
  }

 private:
  explicit LatentDistribution(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// Multiplier rho on all edge probabilities, E[A | X] = rho X X^T.
/// An optional rule gives rho as a function of n.
struct SparsityScale {
  double rho = 1.0;
  std::function<double(std::size_t)> rule;

  double at(std::size_t n) const {
    const double r = rule ? rule(n) : rho;
    if (!(r > 0.0) || r > 1.0) throw InvalidArgument("sparsity factor must lie in (0, 1]");
    return r;
  }

  /// Checks rho * x^T y in [0, 1] over the support of f.
  static SparsityScale checked(double rho, const LatentDistribution& f) {
    SparsityScale s{rho, {}};
    s.at(0);
    if (std::holds_alternative<PointMix>(f.kind()) && rho * f.max_inner_product() > 1.0 + 1e-12)
      throw InvalidArgument("rho * x^T y exceeds 1 on the support");
    return s;
  }
};

inline LatentConfiguration sample_latents(const LatentDistribution& f, std::size_t n, SeededRng& rng) {
  RowMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f.d()));
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, BetaScalar>) {
          for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i), 0) = rng.beta(k.alpha, k.beta);
        } else if constexpr (std::is_same_v<T, EmpiricalLatents>) {
          const auto& src = k.rows.positions();
          for (std::size_t i = 0; i < n; ++i)
            x.row(static_cast<Eigen::Index>(i)) = src.row(static_cast<Eigen::Index>(rng.index(k.rows.n())));
        } else {
          std::vector<double> cdf(k.weights.size());
          std::partial_sum(k.weights.begin(), k.weights.end(), cdf.begin());
          for (std::size_t i = 0; i < n; ++i) {
            const double u = rng.uniform() * cdf.back();
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            const auto atom = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
            x.row(static_cast<Eigen::Index>(i)) = k.atoms.row(static_cast<Eigen::Index>(atom));
          }
        }
      },
      f.kind());
  return LatentConfiguration(std::move(x));
}

struct GraphDraw {
  AdjacencyMatrix graph;
  std::size_t clamped_pairs = 0;  // upper-triangle pairs whose probability was clamped
};

/// Independent Bernoulli(clamp(rho * p_ij)) edges for i < j from an n x n
/// probability matrix.
inline GraphDraw sample_from_probabilities(const Eigen::MatrixXd& p, double rho, SeededRng& rng) {
  const auto n = static_cast<std::size_t>(p.rows());
  GraphDraw out{AdjacencyMatrix(n), 0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double q = rho * p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (q < 0.0 || q > 1.0) {
        q = std::clamp(q, 0.0, 1.0);
        ++out.clamped_pairs;
      }
      if (rng.uniform() < q) out.graph.add_edge(i, j);
    }
  return out;
}

inline GraphDraw sample_rdpg(const LatentConfiguration& x, const SparsityScale& scale, SeededRng& rng) {
  return sample_from_probabilities(x.gram(), scale.at(x.n()), rng);
}

inline GraphDraw sample_rdpg(const LatentConfiguration& x, SeededRng& rng) {
  return sample_rdpg(x, SparsityScale{}, rng);
}

// ---------------------------------------------------------------------------
// Stochastic block models

struct SbmParams {
  Eigen::MatrixXd block;     // K x K
  std::vector<double> pi;    // block proportions

  std::size_t blocks() const noexcept { return pi.size(); }

  void validate() const {
    const auto k = static_cast<Eigen::Index>(pi.size());
    if (k == 0 || block.rows() != k || block.cols() != k)
      throw DimensionError("block matrix must be K x K with K = |pi|");
    if ((block - block.transpose()).cwiseAbs().maxCoeff() > 0.0)
      throw InvalidArgument("block matrix must be symmetric");
    if (block.minCoeff() < 0.0 || block.maxCoeff() > 1.0)
      throw InvalidArgument("block probabilities must lie in [0, 1]");
    double total = 0.0;
    for (double p : pi) {
      if (!(p >= 0.0)) throw InvalidArgument("block proportions must be non-negative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("block proportions must sum to 1");
  }
};

/// Two-block model B_n = (nu / sqrt(n)) [[0.4, 0.5], [0.5, 0.7]], pi = (1/2, 1/2).
inline SbmParams two_block_sbm(std::size_t n, double nu = 5.0) {
  Eigen::MatrixXd b(2, 2);
  b << 0.4, 0.5, 0.5, 0.7;
  return {b * (nu / std::sqrt(static_cast<double>(n))), {0.5, 0.5}};
}

/// Block latent positions nu_k (rows) with nu_k^T nu_l = B_kl, from the
/// positive part of the eigendecomposition; d = rank(B) (at least 1).
inline RowMatrix sbm_to_latents(const SbmParams& p) {
  p.validate();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.block);
  const Eigen::VectorXd& vals = es.eigenvalues();
  const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  if (vals.minCoeff() < -1e-10 * scale) throw NotPsdError(vals.minCoeff());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = vals.size() - 1; i >= 0; --i)
    if (vals(i) > 1e-10 * scale) keep.push_back(i);
  RowMatrix nu = RowMatrix::Zero(p.block.rows(), std::max<Eigen::Index>(1, static_cast<Eigen::Index>(keep.size())));
  for (std::size_t c = 0; c < keep.size(); ++c)
    nu.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]) * std::sqrt(vals(keep[c]));
  return nu;
}

struct SbmDraw {
  AdjacencyMatrix graph;
  std::vector<std::size_t> labels;
};

inline std::vector<std::size_t> sample_labels(const std::vector<double>& pi, std::size_t n, SeededRng& rng) {
  std::vector<double> cdf(pi.size());
  std::partial_sum(pi.begin(), pi.end(), cdf.begin());
  std::vector<std::size_t> labels(n);
  for (auto& l : labels) {
    const double u = rng.uniform() * cdf.back();
    l = std::min<std::size_t>(static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()),
                              pi.size() - 1);
  }
  return labels;
}

inline SbmDraw sample_sbm_with_labels(const SbmParams& p, std::vector<std::size_t> labels, SeededRng& rng) {
  const std::size_t n = labels.size();
  SbmDraw out{AdjacencyMatrix(n), std::move(labels)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < p.block(static_cast<Eigen::Index>(out.labels[i]), static_cast<Eigen::Index>(out.labels[j])))
        out.graph.add_edge(i, j);
  return out;
}

inline SbmDraw sample_sbm(const SbmParams& p, std::size_t n, SeededRng& rng) {
  p.validate();
  auto labels = sample_labels(p.pi, n, rng);
  return sample_sbm_with_labels(p, std::move(labels), rng);
}

// ---------------------------------------------------------------------------

struct ConnectedDraw {
  AdjacencyMatrix graph;
  std::size_t attempts = 0;
};

/// Redraws until connected. Attempt k (1-based) uses rng.child(k), so the
/// result depends only on the stream identity.
template <typename Sampler>
ConnectedDraw sample_connected(Sampler&& sampler, const SeededRng& rng, std::size_t max_attempts) {
  if (max_attempts < 1) throw InvalidArgument("max_attempts must be >= 1");
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    SeededRng stream = rng.child(attempt);
    AdjacencyMatrix g = sampler(stream);
    if (is_connected(g)) return {std::move(g), attempt};
  }
  throw ConnectivityError(max_attempts);
}

}  // namespace rdpgboot
