#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace rdpgboot {

/// Replicate values of one statistic plus the scheme that produced them.
struct BootstrapSample {
  std::vector<double> values;
  std::string method;
  std::uint64_t seed = 0;
  double observed = std::numeric_limits<double>::quiet_NaN();
  /// Draws needed per replicate when replicates are conditioned on connectivity.
  std::vector<std::size_t> attempts;
  /// Largest per-tuple weight seen across replicates (weighted U-statistic schemes).
  double max_tuple_weight = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace rdpgboot
