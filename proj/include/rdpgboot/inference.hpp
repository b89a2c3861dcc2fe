#pragma once

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "bootstrap_sample.hpp"
#include "error.hpp"
#include "models.hpp"
#include "netstats.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace rdpgboot {

enum class CiMethod { Percentile, StdAtBootMean, StdAtObserved };

inline const char* to_string(CiMethod m) {
  switch (m) {
    case CiMethod::Percentile: return "percentile";
    case CiMethod::StdAtBootMean: return "std-boot-mean";
    case CiMethod::StdAtObserved: return "std-observed";
  }
  return "?";
}

inline CiMethod ci_method_from_string(const std::string& s) {
  for (CiMethod m : {CiMethod::Percentile, CiMethod::StdAtBootMean, CiMethod::StdAtObserved})
    if (s == to_string(m)) return m;
  throw InvalidArgument("unknown interval method '" + s + "'");
}

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  CiMethod method = CiMethod::Percentile;
  bool degenerate = false;  // zero-spread sample; the interval is a point

  double length() const noexcept { return upper - lower; }
  bool contains(double x) const noexcept { return lower <= x && x <= upper; }
  bool overlaps(double lo, double hi) const noexcept { return lower <= hi && lo <= upper; }
};

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator).
inline double stddev(const std::vector<double>& v) {
  const double mu = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Sample skewness g1 = m3 / m2^{3/2} with 1/n moments.
inline double skewness(const std::vector<double>& v) {
  const double mu = mean(v);
  double m2 = 0.0, m3 = 0.0;
  for (double x : v) {
    m2 += (x - mu) * (x - mu);
    m3 += (x - mu) * (x - mu) * (x - mu);
  }
  m2 /= static_cast<double>(v.size());
  m3 /= static_cast<double>(v.size());
  return m3 / std::pow(m2, 1.5);
}

/// Linear-interpolation quantile (Hyndman-Fan type 7): h = (n - 1) p,
/// Q = x_floor(h) + (h - floor h)(x_floor(h)+1 - x_floor(h)).
inline double quantile_type7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

/// Bootstrap confidence interval at nominal `level`.
/// Percentile: type-7 quantiles at (1 - level)/2 and (1 + level)/2.
/// StdAtBootMean: replicate mean +- z sd. StdAtObserved: observed +- z sd.
inline ConfidenceInterval ci(const BootstrapSample& sample, double level, CiMethod method) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must lie in (0, 1)");
  const auto& v = sample.values;
  if (v.size() < 2) throw InvalidArgument("bootstrap sample needs at least 2 replicates");
  if (method == CiMethod::Percentile && v.size() < 20)
    throw InvalidArgument("percentile interval needs at least 20 replicates");
  for (double x : v)
    if (!std::isfinite(x)) throw InvalidArgument("bootstrap sample contains non-finite values");
  const double sd = stddev(v);
  ConfidenceInterval out;
  out.level = level;
  out.method = method;
  // Judged on the values themselves: the mean of equal values can carry
  // round-off and give a spurious tiny sd.
  out.degenerate = *std::min_element(v.begin(), v.end()) == *std::max_element(v.begin(), v.end());
  const double z = normal_quantile(0.5 + level / 2.0);
  switch (method) {
    case CiMethod::Percentile:
      out.lower = quantile_type7(v, (1.0 - level) / 2.0);
      out.upper = quantile_type7(v, (1.0 + level) / 2.0);
      break;
    case CiMethod::StdAtBootMean: {
      const double c = mean(v);
      out.lower = c - z * sd;
      out.upper = c + z * sd;
      break;
    }
    case CiMethod::StdAtObserved:
      if (!std::isfinite(sample.observed)) throw InvalidArgument("observed statistic missing");
      out.lower = sample.observed - z * sd;
      out.upper = sample.observed + z * sd;
      break;
  }
  if (out.degenerate) out.lower = out.upper = method == CiMethod::StdAtObserved ? sample.observed : v.front();
  return out;
}

struct McTruth {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t draws = 0;
  std::size_t total_attempts = 0;
};

/// Monte Carlo mean and standard error of a statistic over R fresh model
/// draws. Draw r uses rng.child(r); statistics undefined on disconnected
/// graphs are evaluated on draws conditioned to be connected.
template <typename Sampler>
McTruth mc_truth(Sampler&& sampler, const NetworkStatistic& stat, std::size_t draws, const SeededRng& rng,
                 std::size_t max_attempts = 1000, unsigned threads = 1) {
  if (draws < 100) throw InvalidArgument("Monte Carlo truth needs at least 100 draws");
  std::vector<double> values(draws);
  std::vector<std::size_t> attempts(draws, 1);
  parallel_for(draws, threads, [&](std::size_t r) {
    SeededRng stream = rng.child(r);
    if (stat.defined_on_disconnected) {
      values[r] = stat(sampler(stream));
    } else {
      ConnectedDraw g = sample_connected(sampler, stream, max_attempts);
      attempts[r] = g.attempts;
      values[r] = stat(g.graph);
    }
  });
  McTruth t;
  t.draws = draws;
  t.mean = mean(values);
  t.standard_error = stddev(values) / std::sqrt(static_cast<double>(draws));
  t.total_attempts = std::accumulate(attempts.begin(), attempts.end(), std::size_t{0});
  return t;
}

/// Target of a coverage study: a point value, or a Monte Carlo estimate whose
/// +-2 standard error band counts as covered when an interval overlaps it.
struct CoverageTarget {
  double value = 0.0;
  std::optional<double> standard_error;

  double band_lower() const { return standard_error ? value - 2.0 * *standard_error : value; }
  double band_upper() const { return standard_error ? value + 2.0 * *standard_error : value; }
  bool hit(const ConfidenceInterval& c) const { return c.overlaps(band_lower(), band_upper()); }
};

struct CoverageReport {
  std::size_t trials = 0;    // trials that produced an interval
  std::size_t hits = 0;
  std::size_t failures = 0;  // trials aborted by a computational error
  double rate = 0.0;
  double mean_length = 0.0;
  double truth_lower = 0.0;
  double truth_upper = 0.0;

  double failure_rate() const {
    const std::size_t total = trials + failures;
    return total ? static_cast<double>(failures) / static_cast<double>(total) : 0.0;
  }
};

/// Aggregates per-trial intervals (nullopt marks a failed trial).
inline CoverageReport coverage(const std::vector<std::optional<ConfidenceInterval>>& intervals,
                               const CoverageTarget& target) {
  CoverageReport r;
  r.truth_lower = target.band_lower();
  r.truth_upper = target.band_upper();
  double length = 0.0;
  for (const auto& c : intervals) {
    if (!c) {
      ++r.failures;
      continue;
    }
    ++r.trials;
    r.hits += target.hit(*c);
    length += c->length();
  }
  if (r.trials) {
    r.rate = static_cast<double>(r.hits) / static_cast<double>(r.trials);
    r.mean_length = length / static_cast<double>(r.trials);
  }
  return r;
}

/// Runs `trial(t)` for t in [0, trials), each returning an interval or
/// throwing; exceptions derived from Error are tallied as failures.
template <typename Trial>
CoverageReport coverage(Trial&& trial, std::size_t trials, const CoverageTarget& target, unsigned threads = 1) {
  if (trials < 1) throw InvalidArgument("coverage needs at least one trial");
  std::vector<std::optional<ConfidenceInterval>> intervals(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    try {
      intervals[t] = trial(t);
    } catch (const Error&) {
      intervals[t] = std::nullopt;
    }
  });
  return coverage(intervals, target);
}

}  // namespace rdpgboot
