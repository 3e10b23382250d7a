#pragma once

// Thin wrappers around the LAPACK drivers used by the POD backends.

#include "hapod/space.hpp"

namespace hapod::linalg {

/// Eigenpairs of a symmetric matrix, sorted by non-increasing eigenvalue.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;  // column k belongs to values[k]
};

/// All eigenvalues >= `lower` of the symmetric matrix `a` (lower triangle is
/// read), with eigenvectors. Uses the MRRR driver (dsyevr).
SymmetricEigen symmetric_eigen_above(Matrix a, double lower);

/// All eigenpairs of the symmetric matrix `a`.
SymmetricEigen symmetric_eigen(Matrix a);

struct ThinSvd {
  Matrix u;
  Vector sigmas;  // non-increasing
  Matrix v;
};

/// Thin SVD via divide and conquer (dgesdd).
ThinSvd thin_svd(Matrix a);

/// Singular values only, non-increasing (dgesdd without vectors).
Vector singular_values(Matrix a);

}  // namespace hapod::linalg
