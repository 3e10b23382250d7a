#include "hapod/incremental.hpp"

#include "hapod/error.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace hapod {

IncrementalSession::IncrementalSession(double target, double omega, std::size_t planned_block_count,
                                       PodBackend backend)
    : target_(target), omega_(omega), planned_(planned_block_count), backend_(backend) {
  if (!(target > 0.0) || !std::isfinite(target)) throw ParameterError("target mean error must be positive and finite");
  if (!(omega >= 0.0 && omega <= 1.0)) throw ParameterError("omega must lie in [0, 1]");
  if (planned_block_count < 1) throw ParameterError("planned block count must be >= 1");
  backend_.validate();
}

double IncrementalSession::non_root_epsilon(std::size_t subordinate) const {
  // Chain of `planned_` blocks has depth planned_.
  return std::sqrt(static_cast<double>(subordinate)) * std::sqrt(1.0 - omega_ * omega_) * target_ /
         std::sqrt(static_cast<double>(planned_ - 1));
}

double IncrementalSession::root_epsilon(std::size_t total) const {
  return std::sqrt(static_cast<double>(total)) * omega_ * target_;
}

void IncrementalSession::push(const SnapshotBlock& block) {
  if (finalized_) throw SessionError("push after finalize");
  if (pushed_ == planned_) {
    throw SessionError("push beyond the planned block count of " + std::to_string(planned_) +
                       "; tolerances were derived from the planned chain depth");
  }
  if (current_ && !(current_->space == block.space())) throw InputError("pushed block lives in a different space");

  const auto start = std::chrono::steady_clock::now();
  ++pushed_;
  snapshot_count_ += static_cast<std::size_t>(block.count());
  const std::size_t l = pushed_;

  NodeReport report;
  report.subordinate_count = snapshot_count_;
  if (l == 1) {
    report.node = chain_alpha(planned_, 1);
    report.input_count = static_cast<std::size_t>(block.count());
    // alpha_1 is a leaf; it passes its data through unless it is also the root.
    report.local_epsilon = planned_ == 1 ? root_epsilon(snapshot_count_) : 0.0;
    PodResult res = pod_detailed(block, report.local_epsilon, backend_, false);
    report.discarded_tail_energy = res.discarded_energy;
    current_ = std::move(res.modes);
  } else {
    NodeReport leaf;
    leaf.node = chain_beta(planned_, l - 1);
    leaf.input_count = leaf.subordinate_count = leaf.output_mode_count = static_cast<std::size_t>(block.count());
    reports_.push_back(leaf);

    report.node = chain_alpha(planned_, l);
    report.input_count = static_cast<std::size_t>(current_->size() + block.count());
    report.local_epsilon = l == planned_ ? root_epsilon(snapshot_count_) : non_root_epsilon(snapshot_count_);
    const ModeSet raw = as_passthrough(block);
    const ModeSet* const parts[] = {&*current_, &raw};
    PodResult res = merge_pod(parts, report.local_epsilon, backend_, false);
    report.discarded_tail_energy = res.discarded_energy;
    current_ = std::move(res.modes);
  }
  report.output_mode_count = static_cast<std::size_t>(current_->size());
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  squared_bound_ += report.local_epsilon * report.local_epsilon;
  reports_.push_back(report);
}

HapodResult IncrementalSession::finalize() {
  if (finalized_) throw SessionError("finalize called twice");
  if (pushed_ == 0) throw SessionError("finalize without any pushed block");
  finalized_ = true;

  if (pushed_ < planned_) {
    // Early end of stream: one more POD of the current modes at the root
    // tolerance. Earlier nodes used (planned - 1) in their denominators, so
    // their share of the budget stays within (1 - omega^2) target^2 |S|.
    const auto start = std::chrono::steady_clock::now();
    NodeReport report;
    report.node = chain_alpha(planned_, planned_);
    report.input_count = static_cast<std::size_t>(current_->size());
    report.subordinate_count = snapshot_count_;
    report.local_epsilon = root_epsilon(snapshot_count_);
    const ModeSet* const parts[] = {&*current_};
    PodResult res = merge_pod(parts, report.local_epsilon, backend_, false);
    report.discarded_tail_energy = res.discarded_energy;
    current_ = std::move(res.modes);
    report.output_mode_count = static_cast<std::size_t>(current_->size());
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    squared_bound_ += report.local_epsilon * report.local_epsilon;
    reports_.push_back(report);
  }

  HapodResult result{std::move(*current_), std::sqrt(squared_bound_), std::move(reports_), std::nullopt};
  current_.reset();
  return result;
}

}  // namespace hapod
