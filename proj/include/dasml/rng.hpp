#ifndef DASML_RNG_HPP_
#define DASML_RNG_HPP_

#include <cstddef>
#include <cstdint>

namespace dasml {

/// Counter-based generator. Draw i (0-based) of a generator seeded with s is
///
///   splitmix64_mix(s + (i + 1) * 0x9E3779B97F4A7C15)
///
/// where splitmix64_mix is the SplitMix64 output finalizer
///
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z =  z ^ (z >> 31)
///
/// This is the same sequence as the reference SplitMix64 stream. Only integer
/// arithmetic is involved, so integer draws, uniform() and uniform_index() are
/// bit-identical on every platform. normal() goes through std::log/std::cos
/// and is portable only as far as the platform libm is.
///
/// split(k) derives an independent stream seeded with
/// splitmix64_mix(seed ^ splitmix64_mix(k + 0x9E3779B97F4A7C15)); the parent
/// is not advanced.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform in [lo, hi); returns lo exactly when lo == hi.
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n) without modulo bias. n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal via Box-Muller (consumes two draws).
  double normal();

  SeededRng split(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace dasml

#endif  // DASML_RNG_HPP_
