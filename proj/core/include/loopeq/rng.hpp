#pragma once

#include <array>
#include <cstdint>

// Counter-based stream RNG (Philox-4x32-10).  A generator is addressed by
// (seed, stream); distinct streams are statistically independent and may be
// consumed on different threads without coordination.  Output depends only on
// (seed, stream, draw index), never on thread scheduling, which is what makes
// byte-identical runs across worker counts possible.

namespace loopeq {

// One 10-round Philox-4x32 block.  Matches the published test vectors.
std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> counter,
                                   std::array<uint32_t, 2> key);

class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream);

  uint32_t next_u32();
  uint64_t next_u64();
  // Uniform on [0,1), 53 random bits.
  double uniform();
  // Uniform on (0,1]; safe as a log argument.
  double uniform_pos();
  // Uniform integer in [0, n).  n must be > 0.
  uint64_t below(uint64_t n);
  // Standard normal via Box-Muller; pairs are cached.
  double gaussian();

 private:
  void refill();

  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 4> counter_;
  std::array<uint32_t, 4> block_{};
  int pos_ = 4;  // forces refill on first draw
  bool have_cached_gaussian_ = false;
  double cached_gaussian_ = 0.0;
};

}  // namespace loopeq
