#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ssopt {

/// Seeded generator with a fixed, platform-independent algorithm:
/// mt19937_64 output, 53-bit uniform doubles, Box-Muller normals.
/// Bump kRngAlgorithm whenever the draw sequence changes.
class Rng {
 public:
  static constexpr std::string_view kRngAlgorithm = "mt19937_64/u53/box-muller/v1";

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();  // standard normal
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ssopt
