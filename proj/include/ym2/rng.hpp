#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace ym2 {

// Philox4x32-10 counter-based generator.  Streams are keyed by
// (seed, stream-id) so sample i draws the same numbers no matter which
// thread evaluates it.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{0, 0, static_cast<std::uint32_t>(stream_id),
             static_cast<std::uint32_t>(stream_id >> 32)} {}

  std::uint64_t next_u64() {
    if (buf_pos_ >= 2) refill();
    return buf_[buf_pos_++];
  }

  // Uniform in (0,1), never hitting the endpoints.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double next_gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) >> 32);
  }
  static std::uint32_t mullo(std::uint32_t a, std::uint32_t b) { return a * b; }

  void refill() {
    std::array<std::uint32_t, 4> x = ctr_;
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      const std::uint32_t hi0 = mulhi(0xD2511F53u, x[0]), lo0 = mullo(0xD2511F53u, x[0]);
      const std::uint32_t hi1 = mulhi(0xCD9E8D57u, x[2]), lo1 = mullo(0xCD9E8D57u, x[2]);
      x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    buf_[0] = (static_cast<std::uint64_t>(x[0]) << 32) | x[1];
    buf_[1] = (static_cast<std::uint64_t>(x[2]) << 32) | x[3];
    buf_pos_ = 0;
    if (++ctr_[0] == 0) ++ctr_[1];
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint64_t, 2> buf_{};
  int buf_pos_ = 2;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace ym2
