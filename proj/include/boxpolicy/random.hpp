#pragma once

#include <array>
#include <cstdint>

namespace boxpolicy {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Each
// (key, counter) pair maps to four independent 32-bit words, so any draw can
// be recomputed from its coordinates alone.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(Key key) : key_(key) {}
  // Low word of the seed goes to key[0], high word to key[1].
  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Counter operator()(Counter ctr) const;

 private:
  Key key_;
};

// Named streams; the stream id occupies counter word 3.
enum class Stream : std::uint32_t {
  kCovariates = 0,
  kTreatment = 1,
  kNoise = 2,
  kEvaluation = 3,
};

// Draws addressed by (record index, block index, stream).
class StreamSampler {
 public:
  explicit StreamSampler(std::uint64_t seed) : gen_(seed) {}

  // Two uniforms in [0, 1) with 53-bit resolution from one counter block.
  std::array<double, 2> uniform_pair(std::uint64_t index, std::uint32_t block, Stream stream) const;
  // Standard normal via Box-Muller on the pair at (index, block, stream).
  double normal(std::uint64_t index, std::uint32_t block, Stream stream) const;

 private:
  Philox4x32 gen_;
};

double words_to_unit(std::uint32_t hi, std::uint32_t lo);

}  // namespace boxpolicy
