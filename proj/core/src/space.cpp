#include "hapod/space.hpp"

#include "hapod/error.hpp"

#include <cmath>
#include <string>

namespace hapod {

InnerProductSpace::InnerProductSpace(Index dim) : dim_(dim) {
  if (dim < 1) throw InputError("inner product space dimension must be >= 1, got " + std::to_string(dim));
}

InnerProductSpace::InnerProductSpace(Vector weights) : dim_(weights.size()) {
  if (dim_ < 1) throw InputError("weight vector must not be empty");
  for (Index i = 0; i < dim_; ++i) {
    if (!std::isfinite(weights[i]) || !(weights[i] > 0.0)) {
      throw InputError("inner product weight " + std::to_string(i) + " is not a positive finite number");
    }
  }
  weights_ = std::make_shared<const Vector>(std::move(weights));
}

std::optional<Vector> InnerProductSpace::sqrt_weights() const {
  if (!weighted()) return std::nullopt;
  return Vector(weights_->array().sqrt());
}

double InnerProductSpace::inner(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const {
  if (!weighted()) return x.dot(y);
  return (x.array() * weights_->array() * y.array()).sum();
}

double InnerProductSpace::squared_norm(const Eigen::Ref<const Vector>& x) const { return inner(x, x); }

Matrix InnerProductSpace::to_euclidean(const Eigen::Ref<const Matrix>& x) const {
  if (!weighted()) return x;
  return weights_->array().sqrt().matrix().asDiagonal() * x;
}

Matrix InnerProductSpace::from_euclidean(const Eigen::Ref<const Matrix>& x) const {
  if (!weighted()) return x;
  return weights_->array().sqrt().inverse().matrix().asDiagonal() * x;
}

Matrix InnerProductSpace::cross_gramian(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y) const {
  if (!weighted()) return x.transpose() * y;
  return x.transpose() * (weights_->asDiagonal() * y);
}

bool operator==(const InnerProductSpace& a, const InnerProductSpace& b) {
  if (a.dim_ != b.dim_ || a.weighted() != b.weighted()) return false;
  if (!a.weighted() || a.weights_ == b.weights_) return true;
  return *a.weights_ == *b.weights_;
}

SnapshotBlock::SnapshotBlock(InnerProductSpace space) : space_(std::move(space)), values_(space_.dim(), 0) {}

SnapshotBlock::SnapshotBlock(InnerProductSpace space, Matrix values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (values_.rows() != space_.dim()) {
    throw InputError("snapshot block has " + std::to_string(values_.rows()) + " rows, space dimension is " +
                     std::to_string(space_.dim()));
  }
  if (!values_.allFinite()) throw InputError("snapshot block contains non-finite entries");
}

SnapshotBlock SnapshotBlock::columns(Index first, Index n) const {
  if (first < 0 || n < 0 || first + n > count()) throw InputError("column range out of bounds");
  SnapshotBlock out(space_);
  out.values_ = values_.middleCols(first, n);
  return out;
}

SnapshotBlock SnapshotBlock::concat(const SnapshotBlock& left, const SnapshotBlock& right) {
  if (!(left.space() == right.space())) throw InputError("cannot concatenate blocks from different spaces");
  SnapshotBlock out(left.space_);
  out.values_.resize(left.dim(), left.count() + right.count());
  out.values_ << left.values_, right.values_;
  return out;
}

double SnapshotBlock::total_energy() const {
  if (!space_.weighted()) return values_.squaredNorm();
  return (space_.weights().asDiagonal() * values_.cwiseAbs2()).sum();
}

ModeSet::ModeSet(InnerProductSpace s, Vector sig, Matrix m, bool ortho)
    : space(std::move(s)), sigmas(std::move(sig)), modes(std::move(m)), orthonormal(ortho) {
  if (modes.rows() != space.dim() || modes.cols() != sigmas.size()) {
    throw InputError("mode set shape does not match its space or sigma count");
  }
}

Matrix ModeSet::scaled_modes() const { return modes * sigmas.asDiagonal(); }

double ModeSet::orthonormality_defect() const {
  if (empty()) return 0.0;
  Matrix g = space.cross_gramian(modes, modes);
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff();
}

}  // namespace hapod
