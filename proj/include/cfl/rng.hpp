#pragma once

#include <cstdint>

namespace cfl {

/// Counter-based splittable generator.  Each output is a pure function of
/// (seed, stream, counter), so derived streams can be consumed in any
/// order or in parallel and still reproduce bit-identically.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(mix(seed + 0x9E3779B97F4A7C15ULL) ^ mix(stream + 0xD1B54A32D192ED03ULL))) {}

  /// Derives an independent stream; deterministic in (this stream, id).
  CounterRng stream(std::uint64_t id) const {
    CounterRng r(0);
    r.key_ = mix(key_ ^ mix(id + 0x94D049BB133111EBULL));
    r.counter_ = 0;
    return r;
  }

  std::uint64_t next_u64() { return at(counter_++); }

  /// Stateless access: the value this stream yields at a given counter.
  std::uint64_t at(std::uint64_t counter) const {
    return mix(key_ + counter * 0xBF58476D1CE4E5B9ULL);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t next_below(std::uint64_t bound) {
    // 128-bit multiply trick; bias is negligible for bound << 2^64 and
    // irrelevant here since draws feed Monte Carlo checks, not crypto.
    const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * bound;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cfl
