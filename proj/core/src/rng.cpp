#include "loopeq/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace loopeq {

namespace {

constexpr uint32_t kMult0 = 0xD2511F53u;
constexpr uint32_t kMult1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<uint32_t, 4>& c,
                       const std::array<uint32_t, 2>& k) {
  uint64_t p0 = static_cast<uint64_t>(kMult0) * c[0];
  uint64_t p1 = static_cast<uint64_t>(kMult1) * c[2];
  uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
  uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> counter,
                                   std::array<uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    round_once(counter, key);
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return counter;
}

CounterRng::CounterRng(uint64_t seed, uint64_t stream)
    : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
      counter_{static_cast<uint32_t>(stream),
               static_cast<uint32_t>(stream >> 32), 0, 0} {}

void CounterRng::refill() {
  block_ = philox4x32(counter_, key_);
  pos_ = 0;
  // 128-bit counter increment in the high two words; the low two hold the
  // stream id and stay fixed.
  if (++counter_[2] == 0) ++counter_[3];
}

uint32_t CounterRng::next_u32() {
  if (pos_ == 4) refill();
  return block_[pos_++];
}

uint64_t CounterRng::next_u64() {
  uint64_t lo = next_u32();
  uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform_pos() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

uint64_t CounterRng::below(uint64_t n) {
  if (n == 0) throw std::invalid_argument("CounterRng::below: n must be > 0");
  // Multiply-shift map of a full 64-bit draw onto [0,n); the deviation from
  // uniform is at most n / 2^64 per value and costs no rejection loop.
  unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
  return static_cast<uint64_t>(wide >> 64);
}

double CounterRng::gaussian() {
  if (have_cached_gaussian_) {
    have_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  double u1 = uniform_pos();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  cached_gaussian_ = r * std::sin(a);
  have_cached_gaussian_ = true;
  return r * std::cos(a);
}

}  // namespace loopeq
