#include "hapod/pod.hpp"

#include "hapod/error.hpp"
#include "hapod/linalg.hpp"

#include <cmath>
#include <string>

namespace hapod {
namespace {

constexpr double kReorthogonalizeThreshold = 1e-8;

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ParameterError("POD tolerance must be a finite nonnegative number, got " + std::to_string(epsilon));
  }
}

// One modified Gram-Schmidt sweep in the space's inner product.
void reorthogonalize(const InnerProductSpace& space, Matrix& modes) {
  for (Index k = 0; k < modes.cols(); ++k) {
    for (Index j = 0; j < k; ++j) {
      modes.col(k) -= space.inner(modes.col(j), modes.col(k)) * modes.col(j);
    }
    const double norm = std::sqrt(space.squared_norm(modes.col(k)));
    if (norm > 0.0) modes.col(k) /= norm;
  }
}

// Orthogonality repair and the sign convention (largest-magnitude entry positive).
void finish(PodResult& result, bool want_right) {
  ModeSet& out = result.modes;
  if (out.orthonormality_defect() > kReorthogonalizeThreshold) reorthogonalize(out.space, out.modes);
  for (Index k = 0; k < out.modes.cols(); ++k) {
    Index pivot = 0;
    out.modes.col(k).cwiseAbs().maxCoeff(&pivot);
    if (out.modes(pivot, k) < 0.0) {
      out.modes.col(k) *= -1.0;
      if (want_right) result.right_vectors.col(k) *= -1.0;
    }
  }
}

PodResult empty_result(const InnerProductSpace& space, Index input_count, double discarded, bool want_right) {
  PodResult r{ModeSet(space), discarded, Matrix()};
  if (want_right) r.right_vectors = Matrix(input_count, 0);
  return r;
}

PodResult passthrough(const InnerProductSpace& space, Matrix vectors, bool want_right) {
  const Index m = vectors.cols();
  PodResult r{ModeSet(space, Vector::Ones(m), std::move(vectors), false), 0.0, Matrix()};
  if (want_right) r.right_vectors = Matrix::Identity(m, m);
  return r;
}

// Method of snapshots: phi_k = (1 / sqrt(lambda_k)) sum_i psi_{k,i} s_i.
PodResult pod_from_gramian(const InnerProductSpace& space, const Matrix& vectors, Matrix gram, double epsilon,
                           const PodBackend& backend, bool want_right) {
  const Index m = vectors.cols();
  const double trace = gram.trace();
  if (!std::isfinite(trace)) throw NumericalError("Gramian overflowed; rescale the snapshots");
  if (m == 0 || !(trace > 0.0)) return empty_result(space, m, std::max(trace, 0.0), want_right);

  // lambda_max >= trace / m, so factor * trace never exceeds the real cutoff.
  const double factor = backend.gram_eig_cutoff_factor;
  linalg::SymmetricEigen eig = linalg::symmetric_eigen_above(std::move(gram), factor * trace);
  if (eig.values.size() == 0) return empty_result(space, m, trace, want_right);

  const double cutoff = factor * eig.values[0] * static_cast<double>(m);
  Index kept = 0;
  while (kept < eig.values.size() && eig.values[kept] > cutoff) ++kept;

  const auto n = static_cast<Index>(
      truncation_rank_squared(std::span<const double>(eig.values.data(), static_cast<std::size_t>(kept)), epsilon));
  const double discarded = eig.values.segment(n, kept - n).sum();

  Vector sigmas = eig.values.head(n).cwiseSqrt();
  Matrix psi = eig.vectors.leftCols(n);
  Matrix modes = vectors * (psi * sigmas.cwiseInverse().asDiagonal());

  PodResult r{ModeSet(space, std::move(sigmas), std::move(modes), true), discarded, Matrix()};
  if (want_right) r.right_vectors = std::move(psi);
  finish(r, want_right);
  return r;
}

PodResult pod_from_svd(const InnerProductSpace& space, const Matrix& vectors, double epsilon, bool want_right) {
  const Index m = vectors.cols();
  if (m == 0) return empty_result(space, m, 0.0, want_right);

  linalg::ThinSvd svd = linalg::thin_svd(space.to_euclidean(vectors));
  if (!svd.sigmas.allFinite() || !std::isfinite(svd.sigmas.squaredNorm())) {
    throw NumericalError("singular values overflowed; rescale the snapshots");
  }
  const auto n = static_cast<Index>(truncation_rank(
      std::span<const double>(svd.sigmas.data(), static_cast<std::size_t>(svd.sigmas.size())), epsilon));
  const double discarded = svd.sigmas.tail(svd.sigmas.size() - n).squaredNorm();

  PodResult r{ModeSet(space, svd.sigmas.head(n), space.from_euclidean(svd.u.leftCols(n)), true), discarded,
              Matrix()};
  if (want_right) r.right_vectors = svd.v.leftCols(n);
  finish(r, want_right);
  return r;
}

}  // namespace

void PodBackend::validate() const {
  if (!(gram_eig_cutoff_factor > 0.0 && gram_eig_cutoff_factor < 1.0)) {
    throw ParameterError("gram_eig_cutoff_factor must lie in (0, 1)");
  }
}

std::size_t truncation_rank_squared(std::span<const double> squared_sigmas, double epsilon) {
  check_epsilon(epsilon);
  const std::size_t len = squared_sigmas.size();
  if (epsilon == 0.0) return len;
  const double budget = epsilon * epsilon;
  // Tails grow as N shrinks, so walk from the end and stop at the first overflow.
  double tail = 0.0;
  std::size_t n = len;
  while (n > 0 && tail + squared_sigmas[n - 1] <= budget) {
    tail += squared_sigmas[n - 1];
    --n;
  }
  return n;
}

std::size_t truncation_rank(std::span<const double> sigmas, double epsilon) {
  std::vector<double> squared(sigmas.size());
  for (std::size_t i = 0; i < sigmas.size(); ++i) squared[i] = sigmas[i] * sigmas[i];
  return truncation_rank_squared(squared, epsilon);
}

Matrix gramian(const SnapshotBlock& block) {
  Matrix g = block.space().cross_gramian(block.values(), block.values());
  return 0.5 * (g + g.transpose());
}

ModeSet as_passthrough(const SnapshotBlock& block) {
  return ModeSet(block.space(), Vector::Ones(block.count()), block.values(), false);
}

PodResult pod_detailed(const SnapshotBlock& block, double epsilon, const PodBackend& backend,
                       bool want_right_vectors) {
  check_epsilon(epsilon);
  backend.validate();
  if (epsilon == 0.0) return passthrough(block.space(), block.values(), want_right_vectors);
  if (block.empty()) return empty_result(block.space(), 0, 0.0, want_right_vectors);
  if (backend.kind == PodMethod::DirectSvd) {
    return pod_from_svd(block.space(), block.values(), epsilon, want_right_vectors);
  }
  return pod_from_gramian(block.space(), block.values(), gramian(block), epsilon, backend, want_right_vectors);
}

ModeSet pod(const SnapshotBlock& block, double epsilon, const PodBackend& backend) {
  return pod_detailed(block, epsilon, backend, false).modes;
}

PodResult merge_pod(std::span<const ModeSet* const> parts, double epsilon, const PodBackend& backend,
                    bool want_right_vectors) {
  check_epsilon(epsilon);
  backend.validate();
  if (parts.empty()) throw InputError("merge_pod needs at least one input mode set");
  const InnerProductSpace& space = parts.front()->space;

  Index total = 0;
  std::vector<Matrix> scaled;
  scaled.reserve(parts.size());
  for (const ModeSet* part : parts) {
    if (!(part->space == space)) throw InputError("merge_pod inputs live in different spaces");
    scaled.push_back(part->scaled_modes());
    total += part->size();
  }

  Matrix vectors(space.dim(), total);
  std::vector<Index> offset(parts.size() + 1, 0);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    offset[i + 1] = offset[i] + parts[i]->size();
    vectors.middleCols(offset[i], parts[i]->size()) = scaled[i];
  }

  if (epsilon == 0.0) return passthrough(space, std::move(vectors), want_right_vectors);
  if (total == 0) return empty_result(space, 0, 0.0, want_right_vectors);
  if (backend.kind == PodMethod::DirectSvd) return pod_from_svd(space, vectors, epsilon, want_right_vectors);

  Matrix gram = Matrix::Zero(total, total);
  for (std::size_t a = 0; a < parts.size(); ++a) {
    const Index na = parts[a]->size();
    if (na == 0) continue;
    if (parts[a]->orthonormal) {
      gram.block(offset[a], offset[a], na, na).diagonal() = parts[a]->sigmas.cwiseAbs2();
    } else {
      Matrix g = space.cross_gramian(scaled[a], scaled[a]);
      gram.block(offset[a], offset[a], na, na) = 0.5 * (g + g.transpose());
    }
    for (std::size_t b = a + 1; b < parts.size(); ++b) {
      const Index nb = parts[b]->size();
      if (nb == 0) continue;
      Matrix cross = space.cross_gramian(scaled[a], scaled[b]);
      gram.block(offset[b], offset[a], nb, na) = cross.transpose();
      gram.block(offset[a], offset[b], na, nb) = std::move(cross);
    }
  }
  return pod_from_gramian(space, vectors, std::move(gram), epsilon, backend, want_right_vectors);
}

ModeSet block_gramian_pod(const ModeSet& prior, const SnapshotBlock& fresh, double epsilon,
                          const PodBackend& backend) {
  if (!(prior.space == fresh.space())) {
    throw InputError("block_gramian_pod: prior modes and fresh snapshots have different spaces (dimension " +
                     std::to_string(prior.space.dim()) + " vs " + std::to_string(fresh.dim()) + ")");
  }
  PodBackend gram_backend = backend;
  gram_backend.kind = PodMethod::MethodOfSnapshots;
  const ModeSet raw = as_passthrough(fresh);
  const ModeSet* const parts[] = {&prior, &raw};
  return merge_pod(parts, epsilon, gram_backend, false).modes;
}

}  // namespace hapod
