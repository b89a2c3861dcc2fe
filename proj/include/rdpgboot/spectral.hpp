#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "rng.hpp"

namespace rdpgboot {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n x d matrix of latent positions, one vertex per row.
class LatentConfiguration {
 public:
  LatentConfiguration() = default;
  explicit LatentConfiguration(RowMatrix x) : x_(std::move(x)) {
    if (x_.cols() < 1) throw DimensionError("latent dimension must be >= 1");
    if (!x_.allFinite()) throw InvalidArgument("latent positions must be finite");
  }

  std::size_t n() const noexcept { return static_cast<std::size_t>(x_.rows()); }
  std::size_t d() const noexcept { return static_cast<std::size_t>(x_.cols()); }
  std::span<const double> row(std::size_t i) const noexcept {
    return {x_.data() + i * d(), d()};
  }
  const RowMatrix& positions() const noexcept { return x_; }

  /// Gram matrix X X^T.
  Eigen::MatrixXd gram() const { return x_ * x_.transpose(); }

 private:
  RowMatrix x_;
};

struct EigenPairs {
  Eigen::VectorXd values;   // descending |value|
  Eigen::MatrixXd vectors;  // orthonormal columns
};

struct SolverOptions {
  /// Dense decomposition at or below this size, Lanczos above it.
  std::size_t dense_threshold = 512;
  double residual_tol = 1e-8;
};

inline Eigen::MatrixXd to_dense(const AdjacencyMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::uint32_t j : a.neighbors(i)) m(static_cast<Eigen::Index>(i), j) = 1.0;
  return m;
}

/// Adjacency with the diagonal replaced by normalized degrees
/// (1/n) * sum_{j != i} a_ij.
inline Eigen::MatrixXd augment_diagonal(const AdjacencyMatrix& a) {
  if (a.size() < 2) throw InvalidArgument("augment_diagonal requires n >= 2");
  Eigen::MatrixXd m = to_dense(a);
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = static_cast<double>(a.degree(i)) / n;
  return m;
}

namespace detail {

// Deterministic sign: positive entry sum, or first non-negligible entry
// positive when the sum vanishes.
inline void canonical_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double s = v.sum();
  if (std::abs(s) > 1e-10) {
    if (s < 0) v = -v;
    return;
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-10) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

// Indices of the d largest-magnitude values. Stable, so equal magnitudes keep
// the solver's order.
inline std::vector<Eigen::Index> top_by_magnitude(const Eigen::VectorXd& vals, std::size_t d) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(vals.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(vals(a)) > std::abs(vals(b)); });
  idx.resize(d);
  return idx;
}

inline double max_residual(const Eigen::MatrixXd& m, const EigenPairs& e) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < e.values.size(); ++k) {
    const Eigen::VectorXd r = m * e.vectors.col(k) - e.values(k) * e.vectors.col(k);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

inline void check_request(const Eigen::MatrixXd& m, std::size_t d) {
  if (m.rows() != m.cols()) throw DimensionError("matrix must be square");
  if (d < 1) throw DimensionError("requested dimension must be >= 1");
  if (d > static_cast<std::size_t>(m.rows()))
    throw DimensionError("requested " + std::to_string(d) + " eigenpairs of a " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.rows()) + " matrix");
}

}  // namespace detail

/// Top-d eigenpairs from a full dense symmetric decomposition.
inline EigenPairs dense_top_eigenpairs(const Eigen::MatrixXd& m, std::size_t d) {
  detail::check_request(m, d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw ConvergenceError(0, "dense symmetric eigensolver failed");
  const auto idx = detail::top_by_magnitude(es.eigenvalues(), d);
  EigenPairs out{Eigen::VectorXd(static_cast<Eigen::Index>(d)),
                 Eigen::MatrixXd(m.rows(), static_cast<Eigen::Index>(d))};
  for (std::size_t k = 0; k < d; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    out.values(kk) = es.eigenvalues()(idx[k]);
    out.vectors.col(kk) = es.eigenvectors().col(idx[k]);
    detail::canonical_sign(out.vectors.col(kk));
  }
  return out;
}

/// Top-d eigenpairs by Lanczos with full reorthogonalization.
///
/// The Krylov basis grows until every selected Ritz pair meets
/// ||m v - lambda v|| <= residual_tol * ||m||_2. At full dimension the
/// basis spans R^n, so failure there is reported as non-convergence.
inline EigenPairs lanczos_top_eigenpairs(const Eigen::MatrixXd& m, std::size_t d,
                                         double residual_tol = 1e-8) {
  detail::check_request(m, d);
  const Eigen::Index n = m.rows();
  const Eigen::Index max_k = n;
  Eigen::MatrixXd basis(n, std::min<Eigen::Index>(max_k, 64));
  std::vector<double> alpha, beta;

  SeededRng rng(0x1a2c05ULL);
  auto fresh_direction = [&](Eigen::Index k) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
    for (int pass = 0; pass < 2; ++pass)
      v -= basis.leftCols(k) * (basis.leftCols(k).transpose() * v);
    return Eigen::VectorXd(v / v.norm());
  };

  basis.col(0) = fresh_direction(0);
  Eigen::Index k = 0;  // number of basis vectors with a computed alpha
  Eigen::Index target = std::min<Eigen::Index>(max_k, std::max<Eigen::Index>(2 * static_cast<Eigen::Index>(d) + 20, 30));
  while (true) {
    while (k < target) {
      Eigen::VectorXd w = m * basis.col(k);
      const double a = basis.col(k).dot(w);
      alpha.push_back(a);
      ++k;
      if (k == max_k) break;
      if (k >= basis.cols()) {
        Eigen::MatrixXd grown(n, std::min<Eigen::Index>(max_k, 2 * basis.cols()));
        grown.leftCols(basis.cols()) = basis;
        basis.swap(grown);
      }
      for (int pass = 0; pass < 2; ++pass)
        w -= basis.leftCols(k) * (basis.leftCols(k).transpose() * w);
      const double b = w.norm();
      const double scale = std::max(1.0, std::abs(a));
      if (b <= 1e-12 * scale) {
        // Invariant subspace found; continue in a fresh orthogonal direction.
        beta.push_back(0.0);
        basis.col(k) = fresh_direction(k);
      } else {
        beta.push_back(b);
        basis.col(k) = w / b;
      }
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    if (es.info() != Eigen::Success) throw ConvergenceError(static_cast<std::size_t>(k), "tridiagonal solve failed");
    const double norm = es.eigenvalues().cwiseAbs().maxCoeff();

    if (static_cast<std::size_t>(k) >= d) {
      const auto idx = detail::top_by_magnitude(es.eigenvalues(), d);
      EigenPairs out{Eigen::VectorXd(static_cast<Eigen::Index>(d)),
                     Eigen::MatrixXd(n, static_cast<Eigen::Index>(d))};
      for (std::size_t j = 0; j < d; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        out.values(jj) = es.eigenvalues()(idx[j]);
        out.vectors.col(jj) = basis.leftCols(k) * es.eigenvectors().col(idx[j]);
        out.vectors.col(jj).normalize();
        detail::canonical_sign(out.vectors.col(jj));
      }
      if (detail::max_residual(m, out) <= residual_tol * std::max(norm, 1e-300) || norm == 0.0) return out;
    }
    if (k >= max_k)
      throw ConvergenceError(static_cast<std::size_t>(k), "Lanczos residual above tolerance");
    target = std::min<Eigen::Index>(max_k, k + std::max<Eigen::Index>(k / 2, 10));
  }
}

/// Top-d eigenpairs of a symmetric matrix ordered by descending |eigenvalue|.
/// Ties keep the solver's order, so eigenvectors for repeated eigenvalues are
/// determined only up to rotation within their eigenspace.
inline EigenPairs top_eigenpairs(const Eigen::MatrixXd& m, std::size_t d, const SolverOptions& opts = {}) {
  if (static_cast<std::size_t>(m.rows()) <= opts.dense_threshold) {
    EigenPairs e = dense_top_eigenpairs(m, d);
    const double norm = e.values.size() ? std::abs(e.values(0)) : 0.0;
    if (detail::max_residual(m, e) > opts.residual_tol * std::max(norm, 1.0))
      throw ConvergenceError(0, "dense eigensolver residual above tolerance");
    return e;
  }
  return lanczos_top_eigenpairs(m, d, opts.residual_tol);
}

/// Adjacency spectral embedding U S^{1/2} of a symmetric matrix. Eigenvalues
/// within round-off of zero are treated as zero.
inline LatentConfiguration ase_from_matrix(const Eigen::MatrixXd& m, std::size_t d,
                                           const SolverOptions& opts = {}) {
  const EigenPairs e = top_eigenpairs(m, d, opts);
  const double norm = std::abs(e.values(0));
  const double zero_tol = 1e-12 * std::max(1.0, norm) * static_cast<double>(m.rows());
  RowMatrix x(m.rows(), static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < e.values.size(); ++k) {
    double lambda = e.values(k);
    if (lambda < -zero_tol) {
      std::vector<double> spectrum(e.values.data(), e.values.data() + e.values.size());
      throw NegativeEigenvalueError(std::move(spectrum), static_cast<std::size_t>(k));
    }
    lambda = std::max(lambda, 0.0);
    x.col(k) = e.vectors.col(k) * std::sqrt(lambda);
  }
  return LatentConfiguration(std::move(x));
}

inline LatentConfiguration ase(const AdjacencyMatrix& a, std::size_t d, bool augment = true,
                               const SolverOptions& opts = {}) {
  return ase_from_matrix(augment ? augment_diagonal(a) : to_dense(a), d, opts);
}

struct ProcrustesResult {
  Eigen::MatrixXd rotation;  // d x d orthogonal
  LatentConfiguration aligned;
  double max_row_error = 0.0;
};

/// Orthogonal Q minimizing ||xhat Q - x||_F, from the SVD of xhat^T x.
inline ProcrustesResult procrustes_align(const LatentConfiguration& xhat, const LatentConfiguration& x) {
  if (xhat.n() != x.n() || xhat.d() != x.d())
    throw DimensionError("procrustes_align: configurations differ in shape");
  const Eigen::MatrixXd cross = xhat.positions().transpose() * x.positions();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd q = svd.matrixU() * svd.matrixV().transpose();
  RowMatrix aligned = xhat.positions() * q;
  const double err = x.n() ? (aligned - x.positions()).rowwise().norm().maxCoeff() : 0.0;
  return {std::move(q), LatentConfiguration(std::move(aligned)), err};
}

struct ClampResult {
  Eigen::MatrixXd probabilities;
  std::size_t clamped = 0;  // entries moved, counting both triangles
};

inline ClampResult clamp_probabilities(const Eigen::MatrixXd& p) {
  ClampResult out{p, 0};
  for (Eigen::Index j = 0; j < p.cols(); ++j)
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      double& v = out.probabilities(i, j);
      if (v < 0.0) {
        v = 0.0;
        ++out.clamped;
      } else if (v > 1.0) {
        v = 1.0;
        ++out.clamped;
      }
    }
  return out;
}

}  // namespace rdpgboot
