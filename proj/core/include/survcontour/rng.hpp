#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace survcontour {

// Portable random source: std::mt19937_64 (bit-exact across standard libraries) with
// hand-written reductions, since std:: distributions are implementation-defined.
//
// Stream rule: replicate or tree i of a run seeded with s draws from Rng(s + i).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t seed, std::uint64_t index) { return Rng(seed + index); }

  std::uint64_t next() { return engine_(); }

  // Uniform on {0, ..., n-1} by rejection; n > 0.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return static_cast<std::size_t>(draw % bound);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace survcontour
