#pragma once

#include "hapod/hapod.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace hapod {

/// Level sets of a tree, leaves first. Nodes within a wave are independent.
struct Schedule {
  std::vector<std::vector<NodeId>> waves;
};

Schedule plan(const RootedTree& tree);

struct ExecStats {
  std::vector<double> wave_times;  ///< seconds per wave
  std::vector<double> node_times;  ///< seconds, indexed by node id
  /// Peak over wave barriers of the total mode count held for parents.
  std::size_t peak_resident_modes = 0;
  /// sum over waves of the slowest node in the wave
  double critical_path_time = 0.0;
  /// sum of all node times
  double sequential_time = 0.0;
};

/// Evaluates the HAPOD wave by wave on at most `worker_count` threads. The
/// result does not depend on `worker_count`. If nodes fail, in-flight work of
/// the wave is drained and the first failure is rethrown.
std::pair<HapodResult, ExecStats> run_parallel(const RootedTree& tree, const LeafAssignment& leaves,
                                               const ToleranceAssignment& tol,
                                               const PodBackend& backend, std::size_t worker_count,
                                               bool track_right_factor = false);

}  // namespace hapod
