#include "catch_amalgamated.hpp"

#include <cmath>

#include "rdpgboot/models.hpp"

using namespace rdpgboot;

TEST_CASE("latent samplers") {
  SeededRng rng(1);
  RowMatrix atom(1, 1);
  atom << 0.5;
  const LatentConfiguration pm = sample_latents(LatentDistribution::point_mix(atom, {1.0}), 3, rng);
  for (std::size_t i = 0; i < 3; ++i) CHECK(pm.row(i)[0] == 0.5);

  const LatentConfiguration beta = sample_latents(LatentDistribution::beta(2, 3), 100000, rng);
  const double mean = beta.positions().mean();
  CHECK(std::abs(mean - 0.4) < 3.0 * std::sqrt(0.04 / 100000));

  RowMatrix one(1, 2);
  one << 0.3, 0.4;
  const LatentConfiguration emp = sample_latents(LatentDistribution::empirical(LatentConfiguration(one)), 4, rng);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(emp.row(i)[0] == 0.3);
    CHECK(emp.row(i)[1] == 0.4);
  }
}

TEST_CASE("latent distribution validation") {
  RowMatrix atoms(2, 1);
  atoms << 0.5, 0.9;
  CHECK_THROWS_AS(LatentDistribution::point_mix(atoms, {0.5, 0.6}), InvalidArgument);
  RowMatrix big(1, 1);
  big << 1.5;
  CHECK_THROWS_AS(LatentDistribution::point_mix(big, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(LatentDistribution::beta(0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(SparsityScale::checked(0.0, LatentDistribution::beta(2, 3)), InvalidArgument);
  CHECK_THROWS_AS(SparsityScale::checked(1.5, LatentDistribution::beta(2, 3)), InvalidArgument);
  CHECK(SparsityScale{0.3, {}}.at(100) == 0.3);
  CHECK(SparsityScale{1.0, [](std::size_t n) { return 1.0 / std::log(static_cast<double>(n)); }}.at(100) ==
        Catch::Approx(1.0 / std::log(100.0)));
}

TEST_CASE("RDPG sampler extremes and density") {
  SeededRng rng(2);
  const LatentConfiguration ones(RowMatrix::Ones(6, 1));
  CHECK(sample_rdpg(ones, rng).graph == AdjacencyMatrix::complete(6));
  const LatentConfiguration zeros(RowMatrix::Zero(6, 1));
  CHECK(sample_rdpg(zeros, rng).graph.edge_count() == 0);

  const LatentConfiguration x = sample_latents(LatentDistribution::beta(2, 3), 2000, rng);
  const AdjacencyMatrix a = sample_rdpg(x, rng).graph;
  const double pairs = 2000.0 * 1999.0 / 2.0;
  const double density = static_cast<double>(a.edge_count()) / pairs;
  // Unconditional variance of the density is dominated by the latent draw:
  // Var ~ (4/n) (EX)^2 Var(X) for the Hajek projection, plus Bernoulli noise.
  const double se = std::sqrt(4.0 / 2000.0 * 0.16 * 0.04 + 0.16 * 0.84 / pairs);
  CHECK(std::abs(density - 0.16) < 3.0 * se);
}

TEST_CASE("RDPG sampler clamps and counts out-of-range probabilities") {
  SeededRng rng(3);
  RowMatrix big(3, 1);
  big << 1.2, 1.2, 1.2;
  const GraphDraw g = sample_rdpg(LatentConfiguration(big), rng);
  CHECK(g.clamped_pairs == 3);
  CHECK(g.graph == AdjacencyMatrix::complete(3));
}

TEST_CASE("conditional edge frequencies match X X^T") {
  SeededRng rng(4);
  RowMatrix xm(5, 1);
  xm << 0.2, 0.5, 0.7, 0.9, 0.4;
  const LatentConfiguration x(xm);
  const Eigen::MatrixXd p = x.gram();
  Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(5, 5);
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    const AdjacencyMatrix a = sample_rdpg(x, SparsityScale{0.8, {}}, rng).graph;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) freq(i, j) += a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) {
      const double q = 0.8 * p(i, j);
      CHECK(std::abs(freq(i, j) / reps - q) < 3.5 * std::sqrt(q * (1 - q) / reps));
    }
}

TEST_CASE("SBM latent factorisation") {
  SbmParams id{Eigen::MatrixXd::Identity(2, 2), {0.5, 0.5}};
  const RowMatrix nu = sbm_to_latents(id);
  CHECK((nu * nu.transpose() - id.block).cwiseAbs().maxCoeff() < 1e-10);

  const SbmParams p = two_block_sbm(50);
  const RowMatrix l = sbm_to_latents(p);
  CHECK((l * l.transpose() - p.block).cwiseAbs().maxCoeff() < 1e-10);
  // Independent Cholesky oracle agrees on the Gram matrix.
  const Eigen::MatrixXd chol = p.block.llt().matrixL();
  CHECK((chol * chol.transpose() - l * l.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(p.block.determinant() == Catch::Approx(0.03 * 25.0 / 50.0));

  Eigen::MatrixXd anti(2, 2);
  anti << 0, 1, 1, 0;
  CHECK_THROWS_AS(sbm_to_latents({anti, {0.5, 0.5}}), NotPsdError);
}

TEST_CASE("SBM sampler") {
  SeededRng rng(5);
  CHECK(sample_sbm({Eigen::MatrixXd::Ones(2, 2), {0.5, 0.5}}, 8, rng).graph == AdjacencyMatrix::complete(8));
  CHECK(sample_sbm({Eigen::MatrixXd::Zero(2, 2), {0.5, 0.5}}, 8, rng).graph.edge_count() == 0);

  const SbmParams p = two_block_sbm(100);
  double within = 0.0, within_sq = 0.0;
  const int draws = 200;
  for (int t = 0; t < draws; ++t) {
    const SbmDraw d = sample_sbm(p, 100, rng);
    double edges = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < 100; ++i)
      for (std::size_t j = i + 1; j < 100; ++j)
        if (d.labels[i] == 0 && d.labels[j] == 0) {
          pairs += 1.0;
          edges += d.graph(i, j);
        }
    const double dens = edges / pairs;
    within += dens / draws;
    within_sq += dens * dens / draws;
  }
  const double se = std::sqrt((within_sq - within * within) / draws);
  CHECK(std::abs(within - 0.2) < 3.0 * se);

  CHECK_THROWS_AS(SbmParams({Eigen::MatrixXd::Identity(2, 2), {0.7, 0.7}}).validate(), InvalidArgument);
  Eigen::MatrixXd asym(2, 2);
  asym << 0.1, 0.2, 0.3, 0.1;
  CHECK_THROWS_AS(SbmParams({asym, {0.5, 0.5}}).validate(), InvalidArgument);
}

TEST_CASE("SBM in distribution equals RDPG over its block latents") {
  // Edge density of both samplers agrees within Monte Carlo error.
  const SbmParams p = two_block_sbm(60);
  const RowMatrix nu = sbm_to_latents(p);
  SeededRng rng(6);
  double sbm = 0.0, rdpg = 0.0;
  const int draws = 300;
  for (int t = 0; t < draws; ++t) {
    sbm += static_cast<double>(sample_sbm(p, 60, rng).graph.edge_count());
    const auto labels = sample_labels(p.pi, 60, rng);
    RowMatrix x(60, nu.cols());
    for (Eigen::Index i = 0; i < 60; ++i) x.row(i) = nu.row(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]));
    rdpg += static_cast<double>(sample_rdpg(LatentConfiguration(x), rng).graph.edge_count());
  }
  CHECK(std::abs(sbm - rdpg) / draws < 8.0);  // per-draw SD of edge count is about 30
}

TEST_CASE("connected sampling") {
  SeededRng rng(7);
  const ConnectedDraw full = sample_connected([](SeededRng&) { return AdjacencyMatrix::complete(5); }, rng, 3);
  CHECK(full.attempts == 1);
  try {
    sample_connected([](SeededRng&) { return AdjacencyMatrix(5); }, rng, 5);
    FAIL("expected exhaustion");
  } catch (const ConnectivityError& e) {
    CHECK(e.attempts() == 5);
  }
  const SbmParams p = two_block_sbm(50);
  const ConnectedDraw g = sample_connected([&](SeededRng& r) { return sample_sbm(p, 50, r).graph; }, rng, 1000);
  CHECK(is_connected(g.graph));
  CHECK(g.attempts >= 1);
}

TEST_CASE("samplers are deterministic per stream") {
  const auto f = LatentDistribution::beta(2, 3);
  SeededRng a(99, 4), b(99, 4);
  const LatentConfiguration xa = sample_latents(f, 50, a), xb = sample_latents(f, 50, b);
  CHECK(xa.positions() == xb.positions());
  CHECK(sample_rdpg(xa, a).graph == sample_rdpg(xb, b).graph);
}
