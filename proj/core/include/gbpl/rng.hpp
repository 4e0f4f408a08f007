#pragma once

#include <cstdint>
#include <random>

namespace gbpl {

std::uint64_t splitmix64(std::uint64_t x);

/// Seedable, splittable random source. `split(k)` derives an independent
/// stream from the seed alone, so stream k is the same no matter how much
/// of the parent stream has been consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  Rng split(std::uint64_t stream) const;

  double uniform(double lo, double hi);
  double standard_normal();
  bool coin();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace gbpl
