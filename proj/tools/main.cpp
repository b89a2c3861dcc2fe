#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "rdpgboot/experiments.hpp"
#include "rdpgboot/graph.hpp"
#include "rdpgboot/graphdist.hpp"
#include "rdpgboot/inference.hpp"
#include "rdpgboot/netstats.hpp"
#include "rdpgboot/resample.hpp"
#include "rdpgboot/spectral.hpp"
#include "rdpgboot/ustat.hpp"

using namespace rdpgboot;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

AdjacencyMatrix load_graph(const std::string& path) { return read_edge_list(slurp(path)); }

KernelSpec kernel_by_name(const std::string& name, std::size_t d) {
  if (name == "triangle") return kernel_triangle(d);
  if (name == "avg-degree") return kernel_avg_degree(d);
  if (name == "edge") return kernel_subgraph(SmallGraph::complete(2), d);
  if (name == "two-star") return kernel_subgraph(SmallGraph::path(3), d);
  throw InvalidArgument("unknown kernel '" + name + "' (triangle, avg-degree, edge, two-star)");
}

void dump_samples(const std::string& path, const BootstrapSample& s) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path);
  CsvWriter csv(out, {"value"});
  for (double v : s.values) csv.row() << v;
}

void print_interval(const std::string& statistic, const BootstrapSample& s, double level, CiMethod method) {
  const ConfidenceInterval c = ci(s, level, method);
  CsvWriter csv(std::cout, {"statistic", "scheme", "observed", "lower", "upper", "method", "level", "degenerate"});
  csv.row() << statistic << s.method << s.observed << c.lower << c.upper << to_string(method) << level << c.degenerate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bootstrap inference for random dot product graphs"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  unsigned threads = 1;
  app.add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

  std::string graph_path, graph_path2, samples_path, kernel = "triangle", scheme = "additive", method = "percentile",
                                                    stat_name = "triangle-density", resampler = "rdpg";
  std::size_t d = 1, b = 100, m = 2000, restarts = 1, blocks = 2, max_attempts = 1000;
  std::uint64_t seed = 0;
  double level = 0.95;
  bool no_augment = false, exact = false, connected = false;

  auto* ase_cmd = app.add_subcommand("ase", "adjacency spectral embedding as CSV");
  ase_cmd->add_option("graph", graph_path, "edge-list file")->required();
  ase_cmd->add_option("--d", d, "embedding dimension")->check(CLI::PositiveNumber);
  ase_cmd->add_flag("--no-augment", no_augment, "keep the zero diagonal");

  auto* ub = app.add_subcommand("ustat-boot", "plug-in U-statistic bootstrap interval");
  ub->add_option("graph", graph_path, "edge-list file")->required();
  ub->add_option("--d", d, "embedding dimension")->check(CLI::PositiveNumber);
  ub->add_option("--kernel", kernel, "triangle | avg-degree | edge | two-star");
  ub->add_option("--scheme", scheme, "additive | efron")->check(CLI::IsMember({"additive", "efron"}));
  ub->add_option("--B", b, "bootstrap replicates")->check(CLI::Range(2, 1000000));
  ub->add_option("--M", m, "Monte Carlo tuples when exact enumeration is over budget")->check(CLI::PositiveNumber);
  ub->add_option("--seed", seed, "master seed");
  ub->add_option("--method", method, "percentile | std-boot-mean | std-observed");
  ub->add_option("--level", level, "nominal coverage")->check(CLI::Range(0.0, 1.0));
  ub->add_option("--samples", samples_path, "write replicate values to this CSV");

  auto* nb = app.add_subcommand("net-boot", "whole-network bootstrap interval for a network statistic");
  nb->add_option("graph", graph_path, "edge-list file")->required();
  nb->add_option("--resampler", resampler, "rdpg | graphon | sbm");
  nb->add_option("--d", d, "embedding dimension (rdpg)")->check(CLI::PositiveNumber);
  nb->add_option("--blocks", blocks, "block count (sbm)")->check(CLI::PositiveNumber);
  nb->add_option("--stat", stat_name, "network statistic");
  nb->add_option("--B", b, "bootstrap replicates")->check(CLI::Range(2, 1000000));
  nb->add_option("--seed", seed, "master seed");
  nb->add_option("--method", method, "percentile | std-boot-mean | std-observed");
  nb->add_option("--level", level, "nominal coverage")->check(CLI::Range(0.0, 1.0));
  nb->add_flag("--connected", connected, "redraw replicates until connected");
  nb->add_option("--max-attempts", max_attempts, "draws per connected replicate")->check(CLI::PositiveNumber);
  nb->add_option("--samples", samples_path, "write replicate values to this CSV");

  auto* dist_cmd = app.add_subcommand("dist", "graph matching distance and alignment");
  dist_cmd->add_option("graph1", graph_path, "edge-list file")->required();
  dist_cmd->add_option("graph2", graph_path2, "edge-list file")->required();
  dist_cmd->add_flag("--exact", exact, "exhaustive search (n <= 9)");
  dist_cmd->add_option("--restarts", restarts, "approximate solver restarts")->check(CLI::PositiveNumber);
  dist_cmd->add_option("--seed", seed, "seed for restarts");

  auto* stat_cmd = app.add_subcommand("stat", "evaluate a network statistic");
  stat_cmd->add_option("graph", graph_path, "edge-list file")->required();
  stat_cmd->add_option("--stat", stat_name, "network statistic");

  std::string config_path, experiment, output_dir;
  auto* run_cmd = app.add_subcommand("run", "run an experiment from a config file or its defaults");
  run_cmd->add_option("--config", config_path, "JSON config file");
  run_cmd->add_option("--experiment", experiment,
                      "triangle-density | shortest-path | ustat-clt | wasserstein-decay (defaults)");
  run_cmd->add_option("--output-dir", output_dir, "override output directory");
  bool print_config = false;
  run_cmd->add_flag("--print-config", print_config, "print the effective config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::cout.precision(17);
    if (*ase_cmd) {
      const LatentConfiguration x = ase(load_graph(graph_path), d, !no_augment);
      std::vector<std::string> names;
      for (std::size_t c = 0; c < d; ++c) names.push_back("x" + std::to_string(c + 1));
      // Header built by hand: CsvWriter takes a fixed list.
      for (std::size_t c = 0; c < d; ++c) std::cout << (c ? "," : "") << names[c];
      std::cout << '\n';
      for (std::size_t i = 0; i < x.n(); ++i) {
        for (std::size_t c = 0; c < d; ++c) std::cout << (c ? "," : "") << format_double(x.row(i)[c]);
        std::cout << '\n';
      }
    } else if (*ub) {
      const AdjacencyMatrix a = load_graph(graph_path);
      const KernelSpec h = kernel_by_name(kernel, d);
      const CiMethod cm = ci_method_from_string(method);
      const LatentConfiguration x = ase(a, d);
      const BootstrapSample s =
          bootstrap_ustat(h, x, scheme == "efron" ? WeightScheme::EfronProduct : WeightScheme::Additive, b,
                          SeededRng(seed), {choose_mode(x.n(), h.m, m), kDefaultTupleBudget, threads});
      dump_samples(samples_path, s);
      print_interval(h.name, s, level, cm);
    } else if (*nb) {
      const AdjacencyMatrix a = load_graph(graph_path);
      const NetworkStatistic st = statistic_by_name(stat_name);
      const CiMethod cm = ci_method_from_string(method);
      const SeededRng rng(seed);
      NetworkResampler r = [&] {
        switch (resampler_kind_from_string(resampler)) {
          case ResamplerKind::RdpgPlugIn: return fit_rdpg_resampler(a, d);
          case ResamplerKind::EmpiricalGraphon: return fit_graphon_resampler(a);
          case ResamplerKind::ParametricSbm: break;
        }
        return fit_sbm_resampler(a, blocks, rng.child(~0ULL));
      }();
      if (r.kind() == ResamplerKind::RdpgPlugIn && r.clamp_fraction() > 0.0)
        std::cerr << "clamped probability fraction: " << format_double(r.clamp_fraction()) << '\n';
      const BootstrapSample s =
          bootstrap_statistic(r, st, b, rng, connected || !st.defined_on_disconnected, max_attempts, threads);
      dump_samples(samples_path, s);
      print_interval(st.name, s, level, cm);
    } else if (*dist_cmd) {
      const AdjacencyMatrix a1 = load_graph(graph_path), a2 = load_graph(graph_path2);
      const MatchResult r = exact ? gm_distance_exact(a1, a2) : gm_distance_approx(a1, a2, restarts, seed);
      std::cout << format_double(r.distance) << '\n';
      for (std::size_t i = 0; i < r.permutation.size(); ++i) std::cout << (i ? " " : "") << r.permutation[i];
      std::cout << '\n';
    } else if (*stat_cmd) {
      std::cout << format_double(statistic_by_name(stat_name)(load_graph(graph_path))) << '\n';
    } else if (*run_cmd) {
      ExperimentConfig cfg;
      if (!config_path.empty()) {
        cfg = parse_config(slurp(config_path));
        if (!experiment.empty() && experiment_kind_from_string(experiment) != cfg.experiment)
          throw ConfigError("experiment", "--experiment disagrees with the config file");
      } else {
        cfg = default_config(experiment.empty() ? ExperimentKind::TriangleDensity : experiment_kind_from_string(experiment));
        cfg.output_dir = "results";
      }
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      if (print_config) {
        std::cout << serialize(cfg);
        return 0;
      }
      switch (cfg.experiment) {
        case ExperimentKind::TriangleDensity: {
          const auto r = run_triangle_density(cfg, threads);
          CsvWriter csv(std::cout, {"method", "n", "trials", "rate", "mean_length"});
          for (const auto& row : r.coverage)
            csv.row() << row.method << row.n << row.report.trials << row.report.rate << row.report.mean_length;
          break;
        }
        case ExperimentKind::ShortestPath: {
          const auto r = run_shortest_path(cfg, threads);
          CsvWriter csv(std::cout, {"method", "n", "trials", "rate", "mean_length"});
          for (const auto& row : r.coverage)
            csv.row() << row.method << row.n << row.report.trials << row.report.rate << row.report.mean_length;
          break;
        }
        case ExperimentKind::UstatClt: {
          const auto r = run_ustat_clt(cfg, threads);
          CsvWriter csv(std::cout, {"n", "trial", "observed", "variance", "target"});
          for (const auto& row : r.rows) csv.row() << row.n << row.trial << row.observed << row.variance << r.target;
          break;
        }
        case ExperimentKind::WassersteinDecay: {
          const auto rows = run_wasserstein_decay(cfg, threads);
          CsvWriter csv(std::cout, {"n", "estimate"});
          for (const auto& row : rows) csv.row() << row.n << row.estimate;
          break;
        }
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
