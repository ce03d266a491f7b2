#pragma once

#include <cstdint>

namespace dynslam {

/// xoshiro256** seeded through splitmix64.
///
///  seeding:  s[i] = splitmix64(state) for i = 0..3, state starting at the seed
///  uniform:  (next() >> 11) * 2^-53, in [0, 1)
///  gaussian: Box-Muller cosine branch, u1 = ((next() >> 11) + 1) * 2^-53 in (0, 1],
///            u2 = uniform(); returns sqrt(-2 ln u1) cos(2 pi u2). One normal per call.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gaussian();
  double gaussian(double sigma) { return sigma * gaussian(); }

  static std::uint64_t splitmix64(std::uint64_t& state);

 private:
  std::uint64_t s_[4];
};

}  // namespace dynslam
