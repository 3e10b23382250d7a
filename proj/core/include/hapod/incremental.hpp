#pragma once

#include "hapod/hapod.hpp"

#include <cstddef>

namespace hapod {

/// Single-pass incremental HAPOD over a chain tree whose depth is fixed up
/// front by `planned_block_count`.
///
/// Each push folds the new block into the current modes and drops the raw
/// data. The result matches run_hapod on build_chain(planned_block_count) with
/// LeafPolicy::Zero tolerances. Finalizing after fewer pushes than planned
/// recompresses the current modes once with the root tolerance, which keeps
/// the mean error bound.
class IncrementalSession {
 public:
  IncrementalSession(double target, double omega, std::size_t planned_block_count,
                     PodBackend backend = {});

  /// Throws SessionError past the planned count or after finalize, InputError
  /// on a space mismatch.
  void push(const SnapshotBlock& block);

  /// May be called once.
  HapodResult finalize();

  std::size_t pushed() const { return pushed_; }
  std::size_t planned() const { return planned_; }
  std::size_t snapshot_count() const { return snapshot_count_; }
  /// Current modes (empty before the first push).
  const ModeSet* current() const { return current_ ? &*current_ : nullptr; }

 private:
  double non_root_epsilon(std::size_t subordinate) const;
  double root_epsilon(std::size_t total) const;

  double target_;
  double omega_;
  std::size_t planned_;
  PodBackend backend_;
  std::size_t pushed_ = 0;
  std::size_t snapshot_count_ = 0;
  bool finalized_ = false;
  std::optional<ModeSet> current_;
  double squared_bound_ = 0.0;
  std::vector<NodeReport> reports_;
};

}  // namespace hapod
