#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bootstrap_sample.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "models.hpp"
#include "netstats.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "spectral.hpp"

namespace rdpgboot {

enum class ResamplerKind { RdpgPlugIn, EmpiricalGraphon, ParametricSbm };

inline const char* to_string(ResamplerKind k) {
  switch (k) {
    case ResamplerKind::RdpgPlugIn: return "rdpg";
    case ResamplerKind::EmpiricalGraphon: return "graphon";
    case ResamplerKind::ParametricSbm: return "sbm";
  }
  return "?";
}

inline ResamplerKind resampler_kind_from_string(const std::string& s) {
  for (ResamplerKind k : {ResamplerKind::RdpgPlugIn, ResamplerKind::EmpiricalGraphon, ResamplerKind::ParametricSbm})
    if (s == to_string(k)) return k;
  throw InvalidArgument("unknown resampler '" + s + "'");
}

struct KMeansResult {
  std::vector<std::size_t> labels;
  double wcss = 0.0;
};

namespace detail {

inline double sq_dist(const RowMatrix& y, Eigen::Index i, const Eigen::MatrixXd& c, Eigen::Index k) {
  return (y.row(i) - c.row(k)).squaredNorm();
}

// One k-means++ seeded Lloyd run.
inline KMeansResult kmeans_once(const RowMatrix& y, std::size_t k, SeededRng& rng, std::size_t max_iter) {
  const Eigen::Index n = y.rows();
  const auto ek = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd centers(ek, y.cols());
  centers.row(0) = y.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
  std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (Eigen::Index c = 1; c < ek; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& b = best[static_cast<std::size_t>(i)];
      b = std::min(b, sq_dist(y, i, centers, c - 1));
      total += b;
    }
    Eigen::Index pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= best[static_cast<std::size_t>(i)];
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    }
    centers.row(c) = y.row(pick);
  }

  KMeansResult r{std::vector<std::size_t>(static_cast<std::size_t>(n), k), 0.0};
  for (std::size_t it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      std::size_t arg = 0;
      double dmin = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < ek; ++c) {
        const double dc = sq_dist(y, i, centers, c);
        if (dc < dmin) {
          dmin = dc;
          arg = static_cast<std::size_t>(c);
        }
      }
      changed |= r.labels[static_cast<std::size_t>(i)] != arg;
      r.labels[static_cast<std::size_t>(i)] = arg;
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(ek, y.cols());
    std::vector<std::size_t> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto l = r.labels[static_cast<std::size_t>(i)];
      sums.row(static_cast<Eigen::Index>(l)) += y.row(i);
      ++counts[l];
    }
    for (std::size_t c = 0; c < k; ++c) {
      const auto ec = static_cast<Eigen::Index>(c);
      if (counts[c]) {
        centers.row(ec) = sums.row(ec) / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move its center to the point farthest from its own center.
      Eigen::Index far = 0;
      double dfar = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double di = sq_dist(y, i, centers, static_cast<Eigen::Index>(r.labels[static_cast<std::size_t>(i)]));
        if (di > dfar) {
          dfar = di;
          far = i;
        }
      }
      centers.row(ec) = y.row(far);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    r.wcss += sq_dist(y, i, centers, static_cast<Eigen::Index>(r.labels[static_cast<std::size_t>(i)]));
  return r;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding; the restart with the smallest
/// within-cluster sum of squares wins (earliest restart on ties).
inline KMeansResult kmeans(const RowMatrix& y, std::size_t k, const SeededRng& rng, std::size_t restarts = 10,
                           std::size_t max_iter = 100) {
  if (k < 1 || k > static_cast<std::size_t>(y.rows())) throw InvalidArgument("k-means needs 1 <= k <= n");
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < std::max<std::size_t>(1, restarts); ++r) {
    SeededRng stream = rng.child(r);
    KMeansResult cur = detail::kmeans_once(y, k, stream, max_iter);
    if (cur.wcss < best.wcss) best = std::move(cur);
  }
  return best;
}

/// Block-model estimates given a vertex partition: B_kl is the edge frequency
/// among block pairs (0 when a block pair has no vertex pairs), pi_k the
/// block proportion.
inline SbmParams estimate_sbm(const AdjacencyMatrix& a, const std::vector<std::size_t>& labels, std::size_t k) {
  const std::size_t n = a.size();
  if (labels.size() != n) throw DimensionError("one label per vertex required");
  const auto ek = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd edges = Eigen::MatrixXd::Zero(ek, ek);
  std::vector<double> size(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= k) throw InvalidArgument("label out of range");
    size[labels[i]] += 1.0;
    for (std::size_t j = i + 1; j < n; ++j)
      if (a(i, j)) {
        const auto li = static_cast<Eigen::Index>(labels[i]), lj = static_cast<Eigen::Index>(labels[j]);
        edges(li, lj) += 1.0;
        if (li != lj) edges(lj, li) += 1.0;
      }
  }
  SbmParams p{Eigen::MatrixXd::Zero(ek, ek), std::vector<double>(k)};
  for (std::size_t s = 0; s < k; ++s) {
    p.pi[s] = size[s] / static_cast<double>(n);
    for (std::size_t t = 0; t < k; ++t) {
      const double pairs = s == t ? size[s] * (size[s] - 1.0) / 2.0 : size[s] * size[t];
      p.block(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) =
          pairs > 0.0 ? edges(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) / pairs : 0.0;
    }
  }
  return p;
}

/// Spectral embedding used for clustering: top-K eigenvectors of the
/// diagonally augmented adjacency by eigenvalue magnitude, scaled by
/// sqrt(|lambda|). Equal to ASE(a, K) whenever those eigenvalues are
/// non-negative, and still defined when one is not.
inline RowMatrix clustering_embedding(const AdjacencyMatrix& a, std::size_t k) {
  const EigenPairs e = top_eigenpairs(augment_diagonal(a), k);
  RowMatrix y(e.vectors.rows(), e.vectors.cols());
  for (Eigen::Index c = 0; c < e.vectors.cols(); ++c) y.col(c) = e.vectors.col(c) * std::sqrt(std::abs(e.values(c)));
  return y;
}

/// A fitted whole-network resampler; fitting is deterministic given the
/// observed graph (and the seed, for the block-model fit).
class NetworkResampler {
 public:
  ResamplerKind kind() const noexcept { return kind_; }
  std::size_t n() const noexcept { return observed_.size(); }
  const AdjacencyMatrix& observed() const noexcept { return observed_; }

  /// Embedding dimension of an RDPG plug-in fit.
  std::size_t dimension() const noexcept { return latents_ ? latents_->d() : 0; }
  const std::optional<LatentConfiguration>& latents() const noexcept { return latents_; }
  /// Fraction of off-diagonal entries of X X^T outside [0, 1] at fit time.
  double clamp_fraction() const noexcept { return clamp_fraction_; }

  const std::optional<SbmParams>& sbm() const noexcept { return sbm_; }
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }

  static NetworkResampler rdpg(const AdjacencyMatrix& a, std::size_t d) { return from_latents(a, ase(a, d)); }

  /// RDPG plug-in resampler with given latent rows in place of ASE(a, d),
  /// e.g. an embedding of a known probability matrix.
  static NetworkResampler from_latents(const AdjacencyMatrix& a, LatentConfiguration x) {
    if (x.n() != a.size()) throw DimensionError("one latent row per vertex required");
    NetworkResampler r(ResamplerKind::RdpgPlugIn, a);
    r.latents_ = std::move(x);
    const Eigen::MatrixXd p = r.latents_->gram();
    const std::size_t n = a.size();
    std::size_t outside = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        outside += v < 0.0 || v > 1.0;
      }
    r.clamp_fraction_ = n >= 2 ? static_cast<double>(outside) / (static_cast<double>(n) * (n - 1) / 2.0) : 0.0;
    return r;
  }

  static NetworkResampler graphon(const AdjacencyMatrix& a) {
    return NetworkResampler(ResamplerKind::EmpiricalGraphon, a);
  }

  static NetworkResampler block_model(const AdjacencyMatrix& a, std::size_t k, const SeededRng& rng) {
    if (k < 1 || k > a.size()) throw InvalidArgument("block count must lie in [1, n]");
    NetworkResampler r(ResamplerKind::ParametricSbm, a);
    r.labels_ = kmeans(clustering_embedding(a, k), k, rng).labels;
    r.sbm_ = estimate_sbm(a, r.labels_, k);
    return r;
  }

  /// Empirical-graphon replicate for a given vertex draw z: A*_ij = A[z_i][z_j],
  /// so vertices drawn twice are never joined.
  AdjacencyMatrix graphon_replicate(const std::vector<std::size_t>& z) const {
    const std::size_t n = observed_.size();
    if (z.size() != n) throw DimensionError("vertex draw must have length n");
    AdjacencyMatrix out(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (z[i] != z[j] && observed_(z[i], z[j])) out.add_edge(i, j);
    return out;
  }

  AdjacencyMatrix operator()(SeededRng& rng) const {
    const std::size_t n = observed_.size();
    switch (kind_) {
      case ResamplerKind::RdpgPlugIn: {
        RowMatrix rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(latents_->d()));
        const RowMatrix& x = latents_->positions();
        for (Eigen::Index i = 0; i < rows.rows(); ++i) rows.row(i) = x.row(static_cast<Eigen::Index>(rng.index(n)));
        return sample_from_probabilities(rows * rows.transpose(), 1.0, rng).graph;
      }
      case ResamplerKind::EmpiricalGraphon: {
        std::vector<std::size_t> z(n);
        for (auto& v : z) v = rng.index(n);
        return graphon_replicate(z);
      }
      case ResamplerKind::ParametricSbm:
        return sample_sbm(*sbm_, n, rng).graph;
    }
    throw Error("internal", "unknown resampler kind");
  }

 private:
  NetworkResampler(ResamplerKind kind, const AdjacencyMatrix& a) : kind_(kind), observed_(a) {}

  ResamplerKind kind_;
  AdjacencyMatrix observed_;
  std::optional<LatentConfiguration> latents_;
  double clamp_fraction_ = 0.0;
  std::optional<SbmParams> sbm_;
  std::vector<std::size_t> labels_;
};

inline NetworkResampler fit_rdpg_resampler(const AdjacencyMatrix& a, std::size_t d) {
  return NetworkResampler::rdpg(a, d);
}

/// RDPG plug-in fit that steps the dimension down from d until the embedding
/// exists (a negative eigenvalue among the top d rejects that dimension).
inline NetworkResampler fit_rdpg_resampler_reducing(const AdjacencyMatrix& a, std::size_t d) {
  for (std::size_t k = d; k > 1; --k) {
    try {
      return NetworkResampler::rdpg(a, k);
    } catch (const NegativeEigenvalueError&) {
    }
  }
  return NetworkResampler::rdpg(a, 1);
}

inline NetworkResampler fit_graphon_resampler(const AdjacencyMatrix& a) { return NetworkResampler::graphon(a); }

inline NetworkResampler fit_sbm_resampler(const AdjacencyMatrix& a, std::size_t k, const SeededRng& rng) {
  return NetworkResampler::block_model(a, k, rng);
}

inline AdjacencyMatrix resample(const NetworkResampler& r, SeededRng& rng) { return r(rng); }

inline ConnectedDraw resample_connected(const NetworkResampler& r, const SeededRng& rng, std::size_t max_attempts) {
  return sample_connected(r, rng, max_attempts);
}

/// B replicate values of `stat`; replicate k uses rng.child(k). With
/// require_connected each replicate is redrawn until connected and the
/// attempts are recorded.
inline BootstrapSample bootstrap_statistic(const NetworkResampler& r, const NetworkStatistic& stat, std::size_t b,
                                           const SeededRng& rng, bool require_connected,
                                           std::size_t max_attempts = 1000, unsigned threads = 1) {
  if (b < 2) throw InvalidArgument("bootstrap needs at least 2 replicates");
  BootstrapSample s;
  s.method = to_string(r.kind());
  s.seed = rng.master_seed();
  s.values.resize(b);
  s.attempts.assign(b, 1);
  parallel_for(b, threads, [&](std::size_t k) {
    if (require_connected) {
      ConnectedDraw g = resample_connected(r, rng.child(k), max_attempts);
      s.attempts[k] = g.attempts;
      s.values[k] = stat(g.graph);
    } else {
      SeededRng stream = rng.child(k);
      s.values[k] = stat(r(stream));
    }
  });
  if (!require_connected) s.attempts.clear();
  if (stat.defined_on_disconnected || is_connected(r.observed())) s.observed = stat(r.observed());
  return s;
}

}  // namespace rdpgboot
