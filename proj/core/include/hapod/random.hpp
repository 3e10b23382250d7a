#pragma once

#include <array>
#include <cstdint>

namespace hapod {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// Every draw is a pure function of (key, counter), so independent streams are
/// obtained by reserving counter words and results are identical on every
/// platform.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key);
};

/// Seeded source of uniform and normal variates addressed by (stream, index).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed);

  /// Raw 128 random bits for draw `index` of `stream`.
  Philox4x32::Block bits(std::uint32_t stream, std::uint64_t index) const;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint32_t stream, std::uint64_t index) const;
  /// Standard normal (Box-Muller on one counter block).
  double normal(std::uint32_t stream, std::uint64_t index) const;

 private:
  Philox4x32::Key key_;
};

}  // namespace hapod
