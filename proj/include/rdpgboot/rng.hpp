#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace rdpgboot {

/// SplitMix64 finalizer; used to derive independent seeds from
/// (master, stream) pairs.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic random stream identified by (master_seed, stream_id).
///
/// Equal identifiers give identical sequences. Sub-streams are derived with
/// `child(k)`, so replicate k of a bootstrap always draws from the same
/// stream regardless of how replicates are scheduled across threads.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  SeededRng(std::uint64_t master_seed, std::uint64_t stream_id = 0)
      : master_(master_seed), stream_(stream_id) {
    const std::uint64_t a = mix64(master_seed);
    const std::uint64_t b = mix64(a ^ mix64(stream_id + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t master_seed() const noexcept { return master_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

  /// Independent stream keyed by `sub` under this stream.
  SeededRng child(std::uint64_t sub) const {
    return SeededRng(master_, mix64(stream_ * 0x9e3779b97f4a7c15ULL + mix64(sub)));
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on {0, ..., n-1}; unbiased (rejection on the top range).
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() { return std::normal_distribution<double>{}(*this); }

  double beta(double a, double b) {
    const double x = std::gamma_distribution<double>{a, 1.0}(*this);
    const double y = std::gamma_distribution<double>{b, 1.0}(*this);
    return x / (x + y);
  }

 private:
  std::uint64_t master_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace rdpgboot
