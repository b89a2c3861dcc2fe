#include "catch_amalgamated.hpp"

#include <algorithm>
#include <numeric>

#include "rdpgboot/inference.hpp"
#include "rdpgboot/models.hpp"
#include "rdpgboot/netstats.hpp"
#include "rdpgboot/resample.hpp"

using namespace rdpgboot;

namespace {

SbmParams two_block(std::size_t n) {
  const double s = 5.0 / std::sqrt(static_cast<double>(n));
  Eigen::MatrixXd b(2, 2);
  b << 0.4 * s, 0.5 * s, 0.5 * s, 0.7 * s;
  return {b, {0.5, 0.5}};
}

double edge_density(const AdjacencyMatrix& a) { return rho_hat(a); }

}  // namespace

TEST_CASE("point-mass RDPG fit reproduces the extreme graphs") {
  // Noiseless all-ones P embeds to a point mass at 1.
  const LatentConfiguration ones = ase_from_matrix(Eigen::MatrixXd::Ones(20, 20), 1);
  const NetworkResampler r = NetworkResampler::from_latents(AdjacencyMatrix::complete(20), ones);
  CHECK(r.kind() == ResamplerKind::RdpgPlugIn);
  CHECK(r.dimension() == 1);
  SeededRng rng(61);
  for (int rep = 0; rep < 10; ++rep) CHECK(resample(r, rng).edge_count() == 190);

  const NetworkResampler e = fit_rdpg_resampler(AdjacencyMatrix(20), 2);
  for (int rep = 0; rep < 10; ++rep) CHECK(resample(e, rng).edge_count() == 0);
  CHECK_THROWS_AS(NetworkResampler::from_latents(AdjacencyMatrix(5), ones), DimensionError);
}

TEST_CASE("RDPG fit with too large a dimension fails") {
  AdjacencyMatrix k33(6);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 3; j < 6; ++j) k33.add_edge(i, j);
  CHECK_THROWS_AS(fit_rdpg_resampler(k33, 2), NegativeEigenvalueError);
  CHECK(fit_rdpg_resampler_reducing(k33, 2).dimension() == 1);
}

TEST_CASE("RDPG replicate edge density tracks the observed density") {
  SeededRng rng(62);
  const LatentConfiguration x = sample_latents(LatentDistribution::beta(2, 3), 500, rng);
  const AdjacencyMatrix a = sample_rdpg(x, rng).graph;
  const NetworkResampler r = fit_rdpg_resampler(a, 1);
  int close = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    SeededRng stream = rng.child(k);
    close += std::abs(edge_density(resample(r, stream)) - edge_density(a)) < 0.03;
  }
  CHECK(close >= 90);
}

TEST_CASE("empirical graphon with the identity draw reproduces the observed graph") {
  SeededRng rng(63);
  const AdjacencyMatrix a = sample_sbm(two_block(40), 40, rng).graph;
  const NetworkResampler r = fit_graphon_resampler(a);
  std::vector<std::size_t> z(40);
  std::iota(z.begin(), z.end(), std::size_t{0});
  CHECK(r.graphon_replicate(z) == a);
  CHECK_THROWS_AS(r.graphon_replicate({0, 1}), DimensionError);
}

TEST_CASE("empirical graphon replicates lose edges on repeated vertices") {
  int below = 0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    SeededRng rng(64, t);
    const AdjacencyMatrix a = sample_sbm(two_block(50), 50, rng).graph;
    const NetworkResampler r = fit_graphon_resampler(a);
    double edges = 0.0;
    for (std::uint64_t k = 0; k < 200; ++k) {
      SeededRng stream = rng.child(k);
      edges += static_cast<double>(resample(r, stream).edge_count()) / 200.0;
    }
    below += edges < static_cast<double>(a.edge_count());
  }
  CHECK(below >= 45);
}

namespace {

// Trials out of 100 in which every entry of the fitted block matrix is within
// 0.05 of the truth, up to relabeling of the blocks.
int block_recoveries(const SbmParams& truth, std::size_t n, std::uint64_t seed) {
  int good = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    SeededRng rng(seed, t);
    const AdjacencyMatrix a = sample_sbm(truth, n, rng).graph;
    const NetworkResampler r = fit_sbm_resampler(a, 2, rng.child(1));
    const Eigen::MatrixXd& b = r.sbm()->block;
    Eigen::MatrixXd swapped(2, 2);
    swapped << b(1, 1), b(1, 0), b(0, 1), b(0, 0);
    const double err = std::min((b - truth.block).cwiseAbs().maxCoeff(), (swapped - truth.block).cwiseAbs().maxCoeff());
    good += err < 0.05;
  }
  return good;
}

}  // namespace

TEST_CASE("block-model fit recovers separated blocks") {
  Eigen::MatrixXd b(2, 2);
  b << 0.4, 0.1, 0.1, 0.4;
  CHECK(block_recoveries({b, {0.5, 0.5}}, 200, 65) >= 80);
}

// The shortest-path model's second eigenvalue of E[A] is about 1 at n = 200
// while the adjacency noise has spectral norm near 12, so no spectral method
// can find its blocks. Kept as a record of that limit.
TEST_CASE("block-model fit on the shortest-path model at n = 200", "[!mayfail]") {
  CHECK(block_recoveries(two_block(200), 200, 66) >= 80);
}

TEST_CASE("block-model estimates from known labels") {
  // Two triangles joined by one edge.
  const AdjacencyMatrix a = AdjacencyMatrix::from_edges(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}});
  const SbmParams p = estimate_sbm(a, {0, 0, 0, 1, 1, 1}, 2);
  CHECK(p.block(0, 0) == 1.0);
  CHECK(p.block(1, 1) == 1.0);
  CHECK(p.block(0, 1) == Catch::Approx(1.0 / 9.0));
  CHECK(p.block(1, 0) == p.block(0, 1));
  CHECK(p.pi == std::vector<double>{0.5, 0.5});
  CHECK(estimate_sbm(a, {0, 0, 0, 0, 0, 2}, 3).block(1, 1) == 0.0);
}

TEST_CASE("k-means separates well-separated clusters") {
  RowMatrix y(6, 1);
  y << 0.0, 0.1, 0.2, 5.0, 5.1, 5.2;
  const KMeansResult r = kmeans(y, 2, SeededRng(66));
  CHECK(r.labels[0] == r.labels[1]);
  CHECK(r.labels[1] == r.labels[2]);
  CHECK(r.labels[3] == r.labels[4]);
  CHECK(r.labels[0] != r.labels[3]);
  CHECK(r.wcss == Catch::Approx(0.04));
  CHECK_THROWS_AS(kmeans(y, 7, SeededRng(66)), InvalidArgument);
}

TEST_CASE("all resamplers preserve the vertex count") {
  SeededRng rng(67);
  const AdjacencyMatrix a = sample_sbm(two_block(60), 60, rng).graph;
  const std::vector<NetworkResampler> rs{fit_rdpg_resampler_reducing(a, 2), fit_graphon_resampler(a),
                                         fit_sbm_resampler(a, 2, rng.child(1))};
  for (const auto& r : rs) {
    SeededRng stream = rng.child(2);
    CHECK(resample(r, stream).size() == 60);
    CHECK(r.n() == 60);
  }
}

TEST_CASE("bootstrap statistic basics") {
  SeededRng rng(68);
  const AdjacencyMatrix a = sample_sbm(two_block(50), 50, rng).graph;
  const NetworkResampler r = fit_graphon_resampler(a);
  const NetworkStatistic order{"order", [](const AdjacencyMatrix& g) { return static_cast<double>(g.size()); }, true};
  const BootstrapSample s = bootstrap_statistic(r, order, 20, SeededRng(1), false);
  CHECK(std::all_of(s.values.begin(), s.values.end(), [](double v) { return v == 50.0; }));
  CHECK(s.observed == 50.0);
  CHECK_THROWS_AS(bootstrap_statistic(r, order, 1, SeededRng(1), false), InvalidArgument);

  const NetworkStatistic tri = statistic_by_name("triangle-density");
  CHECK(bootstrap_statistic(r, tri, 30, SeededRng(2), false).values ==
        bootstrap_statistic(r, tri, 30, SeededRng(2), false, 1000, 3).values);

  const NetworkStatistic asp = statistic_by_name("average-shortest-path");
  const BootstrapSample c = bootstrap_statistic(r, asp, 20, SeededRng(3), true);
  CHECK(c.attempts.size() == 20);
  CHECK(std::all_of(c.attempts.begin(), c.attempts.end(), [](std::size_t k) { return k >= 1; }));
}

TEST_CASE("replicate streams are exchangeable") {
  SeededRng rng(69);
  const AdjacencyMatrix a = sample_sbm(two_block(40), 40, rng).graph;
  const NetworkResampler r = fit_rdpg_resampler_reducing(a, 2);
  const NetworkStatistic tri = statistic_by_name("triangle-density");
  const SeededRng master(7);
  std::vector<double> base = bootstrap_statistic(r, tri, 25, master, false).values;
  std::vector<std::uint64_t> ids(25);
  std::iota(ids.begin(), ids.end(), std::uint64_t{0});
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<double> permuted;
  for (std::uint64_t k : ids) {
    SeededRng stream = master.child(k);
    permuted.push_back(tri(resample(r, stream)));
  }
  for (std::size_t i = 0; i < 25; ++i) CHECK(permuted[i] == base[ids[i]]);
  std::sort(base.begin(), base.end());
  std::sort(permuted.begin(), permuted.end());
  CHECK(base == permuted);
}

TEST_CASE("RDPG replicate spread matches the sampling spread of average shortest path") {
  const std::size_t n = 50;
  const SbmParams p = two_block(n);
  const NetworkStatistic asp = statistic_by_name("average-shortest-path");
  auto model = [&](SeededRng& r) { return sample_sbm(p, n, r).graph; };

  std::vector<double> truth(10000);
  for (std::uint64_t k = 0; k < truth.size(); ++k) truth[k] = asp(sample_connected(model, SeededRng(70, k), 1000).graph);
  const double truth_sd = stddev(truth);

  SeededRng rng(71);
  const AdjacencyMatrix a = sample_connected(model, rng, 1000).graph;
  const NetworkResampler r = fit_rdpg_resampler_reducing(a, 2);
  const double boot_sd = stddev(bootstrap_statistic(r, asp, 100, rng.child(1), true).values);
  CHECK(boot_sd > truth_sd / 3.0);
  CHECK(boot_sd < truth_sd * 3.0);
}
