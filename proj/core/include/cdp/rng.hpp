#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace cdp {

/// Seedable, splittable pseudo-random stream.
///
/// Built on std::mt19937_64 seeded through std::seed_seq, both of which are
/// fully specified by the standard, so a (seed, stream) pair reproduces the
/// same bits on every conforming platform. Uniform and normal variates are
/// derived here rather than through the <random> distributions, whose
/// algorithms are implementation-defined.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent child stream; the same (parent, child) always yields the same stream.
  RngStream split(std::uint64_t child) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return std::numeric_limits<result_type>::min(); }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cdp
