#pragma once

#include "hapod/space.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace hapod {

enum class PodMethod {
  MethodOfSnapshots,  ///< eigendecomposition of the snapshot Gramian
  DirectSvd,          ///< thin SVD of the (weighted) snapshot matrix
};

struct PodBackend {
  PodMethod kind = PodMethod::MethodOfSnapshots;
  /// Gramian eigenvalues <= factor * lambda_max * m are treated as zero.
  double gram_eig_cutoff_factor = 4.0 * std::numeric_limits<double>::epsilon();

  /// Throws ParameterError unless the cutoff factor lies in (0, 1).
  void validate() const;
};

/// Smallest N such that the squared tail sum_{n > N} sigma_n^2 is <= epsilon^2.
/// `sigmas` must be non-increasing. epsilon == 0 keeps everything.
std::size_t truncation_rank(std::span<const double> sigmas, double epsilon);

/// Same rule on already squared values (Gramian eigenvalues).
std::size_t truncation_rank_squared(std::span<const double> squared_sigmas, double epsilon);

/// G_ij = <s_i, s_j>, symmetrized.
Matrix gramian(const SnapshotBlock& block);

/// POD output together with bookkeeping needed by the tree recursion.
struct PodResult {
  ModeSet modes;
  /// sum of squared singular values that were truncated (the l2 projection error)
  double discarded_energy = 0.0;
  /// Right singular vectors, |input| x N. Identity for the passthrough case.
  /// Only filled when requested.
  Matrix right_vectors;
};

/// POD(block, epsilon). epsilon == 0 returns the input columns unchanged with
/// unit sigmas and `orthonormal == false`.
ModeSet pod(const SnapshotBlock& block, double epsilon, const PodBackend& backend = {});

PodResult pod_detailed(const SnapshotBlock& block, double epsilon, const PodBackend& backend,
                       bool want_right_vectors);

/// POD of the union of several mode sets, each entering as its scaled modes
/// sigma_n * phi_n. Orthonormal inputs contribute diag(sigma^2) Gramian blocks
/// without recomputing inner products; only cross blocks are formed.
PodResult merge_pod(std::span<const ModeSet* const> parts, double epsilon, const PodBackend& backend,
                    bool want_right_vectors);

/// POD of [sigma_1 phi_1, ..., sigma_N phi_N | fresh] reusing the diagonal
/// Gramian block of an orthonormal prior.
ModeSet block_gramian_pod(const ModeSet& prior, const SnapshotBlock& fresh, double epsilon,
                          const PodBackend& backend = {});

/// Wraps raw snapshots as a passthrough mode set (unit sigmas, not orthonormal).
ModeSet as_passthrough(const SnapshotBlock& block);

}  // namespace hapod
