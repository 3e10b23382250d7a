#include "hapod/exec.hpp"

#include "hapod/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace hapod {

Schedule plan(const RootedTree& tree) {
  const TreeMaps maps = derive_maps(tree);
  Schedule s;
  s.waves.resize(maps.depth);
  for (NodeId a = 0; a < tree.node_count(); ++a) s.waves[maps.level[a] - 1].push_back(a);
  return s;
}

std::pair<HapodResult, ExecStats> run_parallel(const RootedTree& tree, const LeafAssignment& leaves,
                                               const ToleranceAssignment& tol, const PodBackend& backend,
                                               std::size_t worker_count, bool track_right_factor) {
  if (worker_count < 1) throw ParameterError("worker count must be >= 1");
  check_run_inputs(tree, leaves, tol);
  backend.validate();
  const TreeMaps maps = derive_maps(tree);
  const std::vector<std::size_t> below = maps.subordinate_counts(leaves.counts(tree.node_count()));
  const Schedule schedule = plan(tree);

  std::vector<std::optional<NodeOutput>> outputs(tree.node_count());
  HapodResult result{ModeSet(leaves.space()), 0.0, {}, std::nullopt};
  ExecStats stats;
  stats.node_times.assign(tree.node_count(), 0.0);
  double squared_bound = 0.0;

  for (const std::vector<NodeId>& wave : schedule.waves) {
    const auto wave_start = std::chrono::steady_clock::now();
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    // Each node writes only its own output slot; child slots are read-only
    // until the barrier at the end of the wave.
    auto work = [&] {
      while (!failed.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= wave.size()) return;
        const NodeId a = wave[i];
        try {
          std::vector<const NodeOutput*> kids;
          for (NodeId c : tree.children(a)) kids.push_back(&*outputs[c]);
          outputs[a] = evaluate_node(tree, a, leaves, kids, tol[a], below[a], backend, track_right_factor);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
        }
      }
    };

    const std::size_t threads = std::min(worker_count, wave.size());
    if (threads <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(threads - 1);
      for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
      work();
    }
    if (first_error) std::rethrow_exception(first_error);

    double slowest = 0.0;
    for (NodeId a : wave) {
      const NodeReport& r = outputs[a]->report;
      stats.node_times[a] = r.wall_time;
      slowest = std::max(slowest, r.wall_time);
      stats.sequential_time += r.wall_time;
      result.reports.push_back(r);
      squared_bound += tol[a] * tol[a];
    }
    stats.critical_path_time += slowest;

    for (NodeId a : wave) {
      for (NodeId c : tree.children(a)) outputs[c].reset();
    }
    std::size_t resident = 0;
    for (const auto& o : outputs) {
      if (o) resident += static_cast<std::size_t>(o->modes.size());
    }
    stats.peak_resident_modes = std::max(stats.peak_resident_modes, resident);
    stats.wave_times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - wave_start).count());
  }

  NodeOutput& root = *outputs[tree.root()];
  result.modes = std::move(root.modes);
  result.apriori_error_bound = std::sqrt(squared_bound);
  if (track_right_factor) result.right_factor = std::move(root.right_factor);
  return {std::move(result), std::move(stats)};
}

}  // namespace hapod
