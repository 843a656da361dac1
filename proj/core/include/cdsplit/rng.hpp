#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace cdsplit {

/// SplitMix64 finalizer. Used to derive independent stream keys from
/// (master seed, index, ...) tuples.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed) noexcept { return mix64(seed); }

template <typename... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t next, Rest... rest) noexcept {
  return derive_seed(mix64(seed) ^ mix64(next + 0x632BE59BD9B4E019ULL), rest...);
}

/// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3"). The output is a pure function of
/// (key, stream, position), so any replication can be regenerated without
/// replaying the others.
///
/// Satisfies UniformRandomBitGenerator with 64-bit results; each block of
/// the underlying cipher yields two results.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32() : Philox4x32(0, 0) {}
  Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (used_ == 2) {
      buffer_ = generate(counter_block(block_index_++), key_);
      used_ = 0;
    }
    const std::size_t i = 2 * used_++;
    return (static_cast<std::uint64_t>(buffer_[i + 1]) << 32) | buffer_[i];
  }

  void discard(std::uint64_t n) noexcept {
    for (; n > 0; --n) (*this)();
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// The raw ten-round bijection.
  static Block generate(Block ctr, Key key) noexcept {
    ctr = round(ctr, key);
    for (int r = 1; r < 10; ++r) {
      key[0] += 0x9E3779B9U;
      key[1] += 0xBB67AE85U;
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static Block round(const Block& c, const Key& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53U} * c[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57U} * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
  }

  Block counter_block(std::uint64_t index) const noexcept {
    return {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  }

  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  Block buffer_{};
  std::size_t used_ = 2;
};

/// Stream purposes within one replication.
enum class Stream : std::uint64_t {
  kData = 1,
  kSplit = 2,
  kTest = 3,
  kPartition = 4,
};

inline Philox4x32 make_stream(std::uint64_t seed, Stream purpose) {
  return Philox4x32(seed, static_cast<std::uint64_t>(purpose));
}

}  // namespace cdsplit
