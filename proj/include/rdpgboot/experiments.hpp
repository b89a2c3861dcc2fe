#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "csv.hpp"
#include "graphdist.hpp"
#include "inference.hpp"
#include "models.hpp"
#include "netstats.hpp"
#include "parallel.hpp"
#include "resample.hpp"
#include "spectral.hpp"
#include "ustat.hpp"

namespace rdpgboot {

struct CoverageRow {
  std::string method;
  std::size_t n = 0;
  CoverageReport report;
};

namespace detail {

inline std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path.string());
  return out;
}

inline void write_coverage(const std::string& dir, const std::string& name, const std::vector<CoverageRow>& rows) {
  auto out = open_output(dir, name);
  CsvWriter csv(out, {"method", "n", "trials", "rate", "mean_length"});
  for (const auto& r : rows) csv.row() << r.method << r.n << r.report.trials << r.report.rate << r.report.mean_length;
}

inline void check_failures(const std::vector<CoverageRow>& rows) {
  for (const auto& r : rows)
    if (r.report.failure_rate() > 0.05) throw TrialFailureError(r.report.failures, r.report.trials + r.report.failures);
}

inline double beta_moment(double a, double b, int k) {
  double m = 1.0;
  for (int j = 0; j < k; ++j) m *= (a + j) / (a + b + j);
  return m;
}

// Streams: experiment seed -> n index -> trial -> purpose.
inline SeededRng trial_stream(const ExperimentConfig& c, std::size_t n_index, std::size_t trial) {
  return SeededRng(c.seed).child(n_index).child(trial);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Triangle density under a Beta latent distribution

struct TriangleTrialRow {
  std::size_t n = 0;
  std::size_t trial = 0;
  CiMethod method = CiMethod::Percentile;
  ConfidenceInterval interval;
  bool hit = false;
};

struct TriangleResult {
  double theta = 0.0;
  std::vector<TriangleTrialRow> rows;
  std::vector<CoverageRow> coverage;
};

/// Per trial: X ~ Beta^n, A ~ RDPG(X), X^ = ASE(A, d) with diagonal
/// augmentation, B bootstrap replicates of the triangle U-statistic on X^,
/// one interval per method, hit when the interval contains (E X^2)^3.
inline TriangleResult run_triangle_density(const ExperimentConfig& c, unsigned threads = 1) {
  validate(c);
  std::vector<CiMethod> methods;
  for (const auto& m : c.methods) methods.push_back(ci_method_from_string(m));
  const WeightScheme scheme = c.scheme == "efron" ? WeightScheme::EfronProduct : WeightScheme::Additive;
  const auto f = LatentDistribution::beta(c.alpha, c.beta);

  TriangleResult res;
  res.theta = std::pow(detail::beta_moment(c.alpha, c.beta, 2), 3);
  const KernelSpec h = kernel_triangle(c.d);
  std::vector<std::vector<double>> dumps;
  for (std::size_t ni = 0; ni < c.n_values.size(); ++ni) {
    const std::size_t n = c.n_values[ni];
    BootstrapOptions bopts{choose_mode(n, h.m, c.M, c.exact_budget), c.exact_budget, 1};
    std::vector<std::vector<std::optional<ConfidenceInterval>>> cis(c.trials);
    std::vector<double> first_sample;
    parallel_for(c.trials, threads, [&](std::size_t t) {
      cis[t].assign(methods.size(), std::nullopt);
      try {
        SeededRng rng = detail::trial_stream(c, ni, t);
        SeededRng draw = rng.child(0);
        const LatentConfiguration x = sample_latents(f, n, draw);
        const AdjacencyMatrix a = sample_rdpg(x, draw).graph;
        const BootstrapSample s = bootstrap_ustat(h, ase(a, c.d), scheme, c.B, rng.child(1), bopts);
        for (std::size_t k = 0; k < methods.size(); ++k) cis[t][k] = ci(s, c.level, methods[k]);
        if (t == 0) first_sample = s.values;
      } catch (const Error&) {
      }
    });
    dumps.push_back(std::move(first_sample));
    for (std::size_t k = 0; k < methods.size(); ++k) {
      std::vector<std::optional<ConfidenceInterval>> col;
      for (std::size_t t = 0; t < c.trials; ++t) {
        col.push_back(cis[t][k]);
        if (cis[t][k]) res.rows.push_back({n, t, methods[k], *cis[t][k], cis[t][k]->contains(res.theta)});
      }
      res.coverage.push_back({to_string(methods[k]), n, coverage(col, CoverageTarget{res.theta, std::nullopt})});
    }
  }

  if (!c.output_dir.empty()) {
    {
      auto out = detail::open_output(c.output_dir, "triangle_trials.csv");
      CsvWriter csv(out, {"n", "trial", "method", "lower", "upper", "hit", "length"});
      for (const auto& r : res.rows)
        csv.row() << r.n << r.trial << to_string(r.method) << r.interval.lower << r.interval.upper << r.hit
                  << r.interval.length();
    }
    detail::write_coverage(c.output_dir, "triangle_coverage.csv", res.coverage);
    for (std::size_t ni = 0; ni < c.n_values.size(); ++ni) {
      auto out = detail::open_output(c.output_dir, "triangle_bootstrap_n" + std::to_string(c.n_values[ni]) + ".csv");
      CsvWriter csv(out, {"value"});
      for (double v : dumps[ni]) csv.row() << v;
    }
  }
  detail::check_failures(res.coverage);
  return res;
}

// ---------------------------------------------------------------------------
// Average shortest path under a two-block SBM

struct ShortestPathTrialRow {
  std::size_t n = 0;
  std::size_t trial = 0;
  ResamplerKind method = ResamplerKind::RdpgPlugIn;
  double observed = 0.0;
  ConfidenceInterval interval;
  bool hit = false;
  std::size_t attempts = 0;     // draws over all B connected replicates
  std::size_t dimension = 0;    // RDPG plug-in embedding dimension actually used
  double clamp_fraction = 0.0;  // RDPG plug-in fit
};

struct TruthRow {
  std::size_t n = 0;
  double nu = 0.0;
  McTruth truth;
};

struct ShortestPathResult {
  std::vector<ShortestPathTrialRow> rows;
  std::vector<CoverageRow> coverage;
  std::vector<TruthRow> truths;    // at the configured nu
  std::vector<TruthRow> nu_sweep;
};

/// Per trial: a connected SBM draw, each resampler fitted to it, B connected
/// replicates each, and a normal interval at the observed average shortest
/// path using the replicate SD. Hits use the Monte Carlo truth +- 2 SE band.
/// The RDPG plug-in embeds in c.d dimensions, stepping down when the top
/// eigenvalues include a negative one.
inline ShortestPathResult run_shortest_path(const ExperimentConfig& c, unsigned threads = 1) {
  validate(c);
  std::vector<ResamplerKind> methods;
  for (const auto& m : c.methods) methods.push_back(resampler_kind_from_string(m));
  const NetworkStatistic stat = statistic_by_name("average-shortest-path");
  const std::size_t k_blocks = c.sbm_pi.size();
  const SeededRng truth_root = SeededRng(c.seed).child(~0ULL);

  ShortestPathResult res;
  for (std::size_t ni = 0; ni < c.n_values.size(); ++ni) {
    const std::size_t n = c.n_values[ni];
    const SbmParams model = c.sbm_at(n);
    auto sampler = [&](SeededRng& r) { return sample_sbm(model, n, r).graph; };
    const McTruth truth = mc_truth(sampler, stat, c.truth_draws, truth_root.child(ni), c.max_attempts, threads);
    res.truths.push_back({n, c.nu, truth});
    const CoverageTarget target{truth.mean, truth.standard_error};

    std::vector<std::vector<std::optional<ShortestPathTrialRow>>> rows(c.trials);
    parallel_for(c.trials, threads, [&](std::size_t t) {
      rows[t].assign(methods.size(), std::nullopt);
      const SeededRng rng = detail::trial_stream(c, ni, t);
      std::optional<AdjacencyMatrix> a;
      try {
        a = sample_connected(sampler, rng.child(0), c.max_attempts).graph;
      } catch (const Error&) {
        return;
      }
      const double observed = stat(*a);
      for (std::size_t k = 0; k < methods.size(); ++k) {
        try {
          std::optional<NetworkResampler> r;
          switch (methods[k]) {
            case ResamplerKind::RdpgPlugIn: r = fit_rdpg_resampler_reducing(*a, c.d); break;
            case ResamplerKind::EmpiricalGraphon: r = fit_graphon_resampler(*a); break;
            case ResamplerKind::ParametricSbm: r = fit_sbm_resampler(*a, k_blocks, rng.child(1)); break;
          }
          const BootstrapSample s =
              bootstrap_statistic(*r, stat, c.B, rng.child(10 + static_cast<std::uint64_t>(methods[k])), true,
                                  c.max_attempts);
          ShortestPathTrialRow row;
          row.n = n;
          row.trial = t;
          row.method = methods[k];
          row.observed = observed;
          row.interval = ci(s, c.level, CiMethod::StdAtObserved);
          row.hit = target.hit(row.interval);
          for (std::size_t v : s.attempts) row.attempts += v;
          row.dimension = r->dimension();
          row.clamp_fraction = r->clamp_fraction();
          rows[t][k] = row;
        } catch (const Error&) {
        }
      }
    });
    for (std::size_t k = 0; k < methods.size(); ++k) {
      std::vector<std::optional<ConfidenceInterval>> col;
      for (std::size_t t = 0; t < c.trials; ++t) {
        col.push_back(rows[t][k] ? std::optional(rows[t][k]->interval) : std::nullopt);
        if (rows[t][k]) res.rows.push_back(*rows[t][k]);
      }
      res.coverage.push_back({to_string(methods[k]), n, coverage(col, target)});
    }
    for (std::size_t vi = 0; vi < c.nu_values.size(); ++vi) {
      const SbmParams m = c.sbm_at(n, c.nu_values[vi]);
      auto s = [&](SeededRng& r) { return sample_sbm(m, n, r).graph; };
      const std::size_t draws = std::max<std::size_t>(100, c.nu_draws);
      res.nu_sweep.push_back({n, c.nu_values[vi], mc_truth(s, stat, draws, truth_root.child(ni).child(1 + vi),
                                                            c.max_attempts, threads)});
    }
  }

  if (!c.output_dir.empty()) {
    {
      auto out = detail::open_output(c.output_dir, "shortest_path_trials.csv");
      CsvWriter csv(out, {"n", "trial", "resampler", "observed", "lower", "upper", "hit", "length", "attempts"});
      for (const auto& r : res.rows)
        csv.row() << r.n << r.trial << to_string(r.method) << r.observed << r.interval.lower << r.interval.upper
                  << r.hit << r.interval.length() << r.attempts;
    }
    {
      auto out = detail::open_output(c.output_dir, "shortest_path_fits.csv");
      CsvWriter csv(out, {"n", "trial", "dimension", "clamp_fraction"});
      for (const auto& r : res.rows)
        if (r.method == ResamplerKind::RdpgPlugIn) csv.row() << r.n << r.trial << r.dimension << r.clamp_fraction;
    }
    detail::write_coverage(c.output_dir, "shortest_path_coverage.csv", res.coverage);
    auto write_truth = [&](const std::string& name, const std::vector<TruthRow>& rows) {
      auto out = detail::open_output(c.output_dir, name);
      CsvWriter csv(out, {"n", "nu", "mean", "se", "draws"});
      for (const auto& r : rows) csv.row() << r.n << r.nu << r.truth.mean << r.truth.standard_error << r.truth.draws;
    };
    write_truth("shortest_path_truth.csv", res.truths);
    write_truth("nu_sweep.csv", res.nu_sweep);
  }
  detail::check_failures(res.coverage);
  return res;
}

// ---------------------------------------------------------------------------
// Bootstrap variance of a U-statistic against its limit m^2 zeta_1

struct UstatCltRow {
  std::size_t n = 0;
  std::size_t trial = 0;
  double observed = 0.0;
  double variance = 0.0;  // sample variance of sqrt(n) (U* - mean U*)
};

struct UstatCltResult {
  double target = 0.0;  // m^2 zeta_1 for the average-degree kernel
  std::vector<UstatCltRow> rows;
};

/// Average-degree kernel 2 x y on X ~ Beta^n (true latent positions).
inline UstatCltResult run_ustat_clt(const ExperimentConfig& c, unsigned threads = 1) {
  validate(c);
  const auto f = LatentDistribution::beta(c.alpha, c.beta);
  const double ex = detail::beta_moment(c.alpha, c.beta, 1);
  const double var = detail::beta_moment(c.alpha, c.beta, 2) - ex * ex;
  UstatCltResult res;
  res.target = 4.0 * 4.0 * ex * ex * var;  // m = 2, h_1(x) = 2 x E X
  const KernelSpec h = kernel_avg_degree(1);
  for (std::size_t ni = 0; ni < c.n_values.size(); ++ni) {
    const std::size_t n = c.n_values[ni];
    for (const auto& method : c.methods) {
      const WeightScheme scheme = method == "efron" ? WeightScheme::EfronProduct : WeightScheme::Additive;
      std::vector<UstatCltRow> rows(c.trials);
      parallel_for(c.trials, threads, [&](std::size_t t) {
        SeededRng rng = detail::trial_stream(c, ni, t);
        SeededRng draw = rng.child(0);
        const LatentConfiguration x = sample_latents(f, n, draw);
        const BootstrapSample s = bootstrap_ustat(
            h, x, scheme, c.B, rng.child(1), {choose_mode(n, h.m, c.M, c.exact_budget), c.exact_budget, 1});
        std::vector<double> z(s.values.size());
        for (std::size_t k = 0; k < z.size(); ++k) z[k] = std::sqrt(static_cast<double>(n)) * s.values[k];
        const double sd = stddev(z);
        rows[t] = {n, t, s.observed, sd * sd};
      });
      res.rows.insert(res.rows.end(), rows.begin(), rows.end());
    }
  }
  if (!c.output_dir.empty()) {
    auto out = detail::open_output(c.output_dir, "ustat_clt.csv");
    CsvWriter csv(out, {"n", "trial", "observed", "variance", "target"});
    for (const auto& r : res.rows) csv.row() << r.n << r.trial << r.observed << r.variance << res.target;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Wasserstein distance between bootstrap and model graph distributions

struct WassersteinRow {
  std::size_t n = 0;
  std::size_t trial = 0;
  double estimate = 0.0;
};

/// For each run and n: A ~ RDPG(Beta, n), an RDPG plug-in fit, `samples`
/// replicates from the fit against `samples` fresh model draws.
inline std::vector<WassersteinRow> run_wasserstein_decay(const ExperimentConfig& c, unsigned threads = 1) {
  validate(c);
  const auto f = LatentDistribution::beta(c.alpha, c.beta);
  const ResamplerKind kind = resampler_kind_from_string(c.methods.front());
  std::vector<WassersteinRow> rows;
  for (std::size_t t = 0; t < c.trials; ++t)
    for (std::size_t ni = 0; ni < c.n_values.size(); ++ni) {
      const std::size_t n = c.n_values[ni];
      const SeededRng rng = detail::trial_stream(c, ni, t);
      SeededRng draw = rng.child(0);
      const AdjacencyMatrix a = sample_rdpg(sample_latents(f, n, draw), draw).graph;
      NetworkResampler r = kind == ResamplerKind::RdpgPlugIn        ? fit_rdpg_resampler_reducing(a, c.d)
                           : kind == ResamplerKind::EmpiricalGraphon ? fit_graphon_resampler(a)
                                                                     : fit_sbm_resampler(a, c.d, rng.child(1));
      std::vector<AdjacencyMatrix> boot, fresh;
      for (std::size_t l = 0; l < c.samples; ++l) {
        SeededRng rb = rng.child(2).child(l), rf = rng.child(3).child(l);
        boot.push_back(r(rb));
        fresh.push_back(sample_rdpg(sample_latents(f, n, rf), rf).graph);
      }
      const double w = empirical_wasserstein(boot, fresh, ApproxMatchOptions{c.match_restarts}, rng.child(4), threads);
      rows.push_back({n, t, w});
    }
  if (!c.output_dir.empty()) {
    auto out = detail::open_output(c.output_dir, "wasserstein.csv");
    CsvWriter csv(out, {"n", "estimate"});
    for (const auto& r : rows) csv.row() << r.n << r.estimate;
  }
  return rows;
}

}  // namespace rdpgboot
