#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace lvlingam {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011) as a
/// UniformRandomBitGenerator. The 64-bit seed is the key; `stream` fills the
/// upper half of the counter so distinct streams never overlap.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed = 0, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  void discard(std::uint64_t z);

  /// One application of the 10-round bijection.
  static Block generate(Block counter, Key key);

 private:
  void refill();

  Key key_;
  Block counter_;
  Block buffer_{};
  unsigned position_ = 4;
};

/// SplitMix64 output function.
std::uint64_t splitmix64(std::uint64_t x);

/// Hash of a base seed with any number of integer coordinates.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

}  // namespace lvlingam
