#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>

namespace hapod {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// R^d with an optional diagonal inner product <x, y> = sum_i w_i x_i y_i.
///
/// Copies share the weight vector, so passing spaces by value is cheap.
class InnerProductSpace {
 public:
  /// Euclidean space of dimension `dim` (dim >= 1).
  explicit InnerProductSpace(Index dim);
  /// Weighted space; every weight must be strictly positive and finite.
  explicit InnerProductSpace(Vector weights);

  Index dim() const { return dim_; }
  bool weighted() const { return weights_ != nullptr; }
  /// Only valid when weighted().
  const Vector& weights() const { return *weights_; }
  /// sqrt(w), or an empty optional for the Euclidean case.
  std::optional<Vector> sqrt_weights() const;

  double inner(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const;
  double squared_norm(const Eigen::Ref<const Vector>& x) const;

  /// Maps columns into Euclidean coordinates: diag(sqrt(w)) * x.
  Matrix to_euclidean(const Eigen::Ref<const Matrix>& x) const;
  /// Inverse of to_euclidean.
  Matrix from_euclidean(const Eigen::Ref<const Matrix>& x) const;
  /// X^T W Y.
  Matrix cross_gramian(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y) const;

  friend bool operator==(const InnerProductSpace& a, const InnerProductSpace& b);

 private:
  Index dim_;
  std::shared_ptr<const Vector> weights_;
};

/// An ordered batch of snapshot vectors, one per column.
class SnapshotBlock {
 public:
  /// Empty block (zero columns) in `space`.
  explicit SnapshotBlock(InnerProductSpace space);
  /// Throws InputError on non-finite entries or a row count different from space.dim().
  SnapshotBlock(InnerProductSpace space, Matrix values);

  const InnerProductSpace& space() const { return space_; }
  const Matrix& values() const { return values_; }
  Index count() const { return values_.cols(); }
  Index dim() const { return space_.dim(); }
  bool empty() const { return count() == 0; }

  /// Contiguous column range [first, first + n).
  SnapshotBlock columns(Index first, Index n) const;
  /// Column-wise concatenation; spaces must match.
  static SnapshotBlock concat(const SnapshotBlock& left, const SnapshotBlock& right);

  /// Sum of squared norms of all columns.
  double total_energy() const;

 private:
  InnerProductSpace space_;
  Matrix values_;
};

/// Singular values and modes (sigma_n, phi_n) produced by a POD.
///
/// `orthonormal == false` marks the passthrough output of a zero-tolerance POD:
/// the modes are the raw input vectors and every sigma equals one.
struct ModeSet {
  InnerProductSpace space;
  Vector sigmas;
  Matrix modes;
  bool orthonormal = true;

  explicit ModeSet(InnerProductSpace s) : space(std::move(s)), modes(space.dim(), 0) {}
  ModeSet(InnerProductSpace s, Vector sig, Matrix m, bool ortho);

  Index size() const { return sigmas.size(); }
  bool empty() const { return size() == 0; }

  /// Columns sigma_n * phi_n, the form in which modes enter a parent POD.
  Matrix scaled_modes() const;
  /// Max |<phi_i, phi_j> - delta_ij|.
  double orthonormality_defect() const;
};

}  // namespace hapod
