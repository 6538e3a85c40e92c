#pragma once

#include <array>
#include <cstdint>

namespace slicer {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A draw is a pure function of (key, counter), so every particle, scatterer
/// and coin flip can be addressed directly without sequential state. That is
/// what makes ensemble results independent of thread count.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit constexpr Philox4x32(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}
  constexpr Philox4x32(Key key) noexcept : key_(key) {}

  [[nodiscard]] constexpr Counter operator()(Counter ctr) const noexcept {
    Key key = key_;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  Key key_;
};

/// First word of a Philox counter; keeps the independent random streams of
/// the library disjoint under one seed.
enum class StreamDomain : std::uint32_t {
  SlicerInitialPoint = 1,
  ScattererGap = 2,
  WalkerCoin = 3,
};

[[nodiscard]] constexpr std::uint64_t low_bits64(const Philox4x32::Counter& block) noexcept {
  return (std::uint64_t{block[1]} << 32) | block[0];
}

[[nodiscard]] constexpr std::uint64_t high_bits64(const Philox4x32::Counter& block) noexcept {
  return (std::uint64_t{block[3]} << 32) | block[2];
}

/// Uniform on [0,1) over the dyadic grid k * 2^-53. On that grid 1 - x is
/// exact, so the reflection x -> 1 - x is an exact involution.
[[nodiscard]] constexpr double unit_closed_open(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform on the open interval (0,1).
[[nodiscard]] constexpr double unit_open(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace slicer
