#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace kolmo {

// Philox 4x32-10 counter-based generator (Salmon et al., SC'11).
// A draw is a pure function of (key, counter), so independent streams are
// just distinct counter prefixes and replay is exact on any worker layout.
namespace philox {

constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline void round_once(Counter& x, const Key& k) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * x[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * x[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
}

inline Counter block(Counter ctr, Key key) {
  for (int r = 0; r < 10; ++r) {
    round_once(ctr, key);
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace philox

/// 64-bit finalizer used to derive child stream ids.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// One logical random stream: (seed, stream id) fix the sequence, the draw
/// counter walks along it.  Copyable by value; `child` derives a decorrelated
/// stream without consuming anything from the parent.
class RngStream {
public:
  RngStream() : RngStream(0, 0) {}

  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream_id) {}

  std::uint64_t stream_id() const { return stream_; }

  /// Deterministically derived substream; independent for distinct tags.
  RngStream child(std::uint64_t tag) const {
    RngStream c;
    c.key_ = key_;
    c.stream_ = mix64(stream_ ^ mix64(tag));
    return c;
  }

  /// Next 64 uniform bits.
  std::uint64_t next_u64() {
    if (block_pos_ >= 2) refill();
    return block_[block_pos_++];
  }

  /// Uniform double in the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (fixed two-uniform consumption per pair).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

private:
  void refill() {
    const philox::Counter ctr = {static_cast<std::uint32_t>(ctr_),
                                 static_cast<std::uint32_t>(ctr_ >> 32),
                                 static_cast<std::uint32_t>(stream_),
                                 static_cast<std::uint32_t>(stream_ >> 32)};
    const philox::Counter out = philox::block(ctr, key_);
    block_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    block_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    block_pos_ = 0;
    ++ctr_;
  }

  philox::Key key_{0, 0};
  std::uint64_t stream_ = 0;
  std::uint64_t ctr_ = 0;
  std::array<std::uint64_t, 2> block_{};
  int block_pos_ = 2;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

/// Root stream for a run: seed is hashed so nearby seeds do not share prefixes.
inline RngStream make_root_stream(std::uint64_t seed) {
  return RngStream(mix64(seed), mix64(seed ^ 0xA5A5A5A5A5A5A5A5ull));
}

}  // namespace kolmo
