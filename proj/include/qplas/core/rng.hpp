#pragma once

// Deterministic randomness.
//
// Every random number in the library comes from Philox4x32-10 (Salmon et al.,
// "Parallel random numbers: as easy as 1, 2, 3", SC'11), a counter-based
// generator: output = bijection(counter, key). The key is the 64-bit seed and
// the 128-bit counter is (index, stream_id). Nothing depends on the standard
// library's distributions, so a given (seed, stream_id, index) triple yields the
// same bits on every platform.
//
// Two access patterns are provided:
//   * RngStream  - sequential draws (Poisson arrival processes, dark counts);
//   * keyed draws - uniform_at(spec, index) for per-event decisions, so the
//     fate of an event depends only on its id and not on how many other
//     events were processed before it.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace qplas {

namespace detail {

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

using PhiloxBlock = std::array<std::uint32_t, 4>;

/// Philox4x32 with 10 rounds.
inline PhiloxBlock philox4x32_10(PhiloxBlock ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53U;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57U;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9U;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85U;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    detail::mulhilo32(kMul0, ctr[0], hi0, lo0);
    detail::mulhilo32(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Identifies one reproducible random sequence.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  /// Independent sub-stream, e.g. one per pipeline stage or time segment.
  constexpr RngSpec derive(std::uint64_t tag) const {
    return {seed, detail::splitmix64(stream_id ^ detail::splitmix64(tag + 0x632BE59BD9B4E019ULL))};
  }

  friend constexpr bool operator==(const RngSpec&, const RngSpec&) = default;
};

/// Two 64-bit words for counter value `index` of the given stream.
inline std::array<std::uint64_t, 2> random_words(const RngSpec& spec, std::uint64_t index) {
  const PhiloxBlock ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                        static_cast<std::uint32_t>(spec.stream_id),
                        static_cast<std::uint32_t>(spec.stream_id >> 32)};
  const PhiloxBlock out = philox4x32_10(
      ctr, {static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32)});
  return {(static_cast<std::uint64_t>(out[1]) << 32) | out[0],
          (static_cast<std::uint64_t>(out[3]) << 32) | out[2]};
}

/// Uniform on [0, 1) with 53 random bits.
inline double to_unit_closed_open(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform on (0, 1); safe as a logarithm argument.
inline double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal from two words (Box-Muller, cosine branch).
inline double to_standard_normal(std::uint64_t a, std::uint64_t b) {
  const double radius = std::sqrt(-2.0 * std::log(to_unit_open(a)));
  return radius * std::cos(2.0 * std::numbers::pi * to_unit_closed_open(b));
}

inline double uniform_at(const RngSpec& spec, std::uint64_t index) {
  return to_unit_closed_open(random_words(spec, index)[0]);
}

inline double normal_at(const RngSpec& spec, std::uint64_t index) {
  const auto w = random_words(spec, index);
  return to_standard_normal(w[0], w[1]);
}

/// Sequential view of a stream: draw k uses counter k / 2, word k % 2.
class RngStream {
public:
  explicit RngStream(RngSpec spec) : spec_(spec) {}

  std::uint64_t next_u64() {
    if (lane_ == 2) {
      words_ = random_words(spec_, block_++);
      lane_ = 0;
    }
    return words_[lane_++];
  }

  double uniform() { return to_unit_closed_open(next_u64()); }
  double uniform_open() { return to_unit_open(next_u64()); }

  double normal() {
    const std::uint64_t a = next_u64();
    return to_standard_normal(a, next_u64());
  }

  /// Exponential with the given mean.
  double exponential(double mean) { return -mean * std::log(uniform_open()); }

  const RngSpec& spec() const noexcept { return spec_; }

private:
  RngSpec spec_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> words_{};
  int lane_ = 2;
};

}  // namespace qplas
