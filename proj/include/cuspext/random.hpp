#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cuspext {

std::uint64_t splitmix64(std::uint64_t x);

/// Stable hash of a seed and a list of integer tags.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::int64_t> tags);

/// Platform-independent random stream. std::mt19937_64 is fully specified;
/// the real-valued conversions below are done by hand because the standard
/// distributions are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cuspext
