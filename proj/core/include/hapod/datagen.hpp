#pragma once

#include "hapod/space.hpp"

#include <cstddef>
#include <cstdint>

namespace hapod {

/// Forced inviscid Burgers equation on (0, 1), zero initial and left boundary
/// values, integrated with explicit Euler on a conservative upwind grid.
struct BurgersConfig {
  std::size_t grid_size = 500;  ///< spatial nodes x_i = i / N, i = 1..N
  std::size_t step_count = 10000;
  double time_step = 1e-4;
  double spark_probability = 1e-3;
  double spark_max = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BurgersTrajectory {
  SnapshotBlock snapshots;  ///< grid_size x step_count, state after each step
  std::size_t spark_count = 0;
};

/// Throws NumericalError naming the step if the state stops being finite.
BurgersTrajectory burgers_snapshots(const BurgersConfig& cfg);

/// U diag(exp(-decay_rate * n)) V^T, n = 1..min(d, m), with seeded random
/// orthonormal U (d x r) and V (m x r).
SnapshotBlock synthetic_decay(Index d, Index m, double decay_rate, std::uint64_t seed);

}  // namespace hapod
