#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace erprop {

/// Derives an independent seed for a named consumer from the run seed, so
/// that adding a new consumer never perturbs the streams of existing ones.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream_name);

/// Thin wrapper over mt19937_64 with distribution helpers whose output does
/// not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::string_view stream_name)
      : engine_(derive_seed(seed, stream_name)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform in [0, n). Requires n > 0.
  std::size_t index(std::size_t n);

  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace erprop
