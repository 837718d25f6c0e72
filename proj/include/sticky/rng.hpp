#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace sticky {

/// Philox4x32-10 counter-based generator.
///
/// Stream layout: key = master seed (two 32-bit words); counter words 0-1
/// hold the block index, word 2 the stream id (one per path), word 3 the
/// substream (purpose within a path). Streams for distinct (stream id,
/// substream) pairs are disjoint, and a path's stream does not depend on how
/// many paths run alongside it.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint32_t stream_id, std::uint32_t substream = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream_id),
        substream_(substream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (lane_ == 2) refill();
    return buffer_[lane_++];
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_(*this); }

  std::uint32_t stream_id() const noexcept { return stream_; }
  std::uint32_t substream() const noexcept { return substream_; }
  std::uint64_t blocks_used() const noexcept { return block_; }

  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> ctr,
                                             std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept {
    const auto out = philox({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                             stream_, substream_},
                            key_);
    ++block_;
    buffer_[0] = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    buffer_[1] = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    lane_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_;
  std::uint32_t substream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int lane_ = 2;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Substream tags used across the engine.
namespace substream {
inline constexpr std::uint32_t kDynamics = 0;
inline constexpr std::uint32_t kClock = 1;
inline constexpr std::uint32_t kStart = 2;
inline constexpr std::uint32_t kOracle = 3;
inline constexpr std::uint32_t kSampling = 4;
}  // namespace substream

}  // namespace sticky
