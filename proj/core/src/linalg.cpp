#include "hapod/linalg.hpp"

#include "hapod/error.hpp"

#include <lapacke.h>

#include <algorithm>
#include <string>
#include <vector>

namespace hapod::linalg {
namespace {

// LAPACK returns ascending eigenvalues; flip to non-increasing order.
SymmetricEigen descending(Vector values, Matrix vectors) {
  return {values.reverse(), vectors.rowwise().reverse()};
}

}  // namespace

SymmetricEigen symmetric_eigen_above(Matrix a, double lower) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (a.rows() != a.cols()) throw NumericalError("symmetric_eigen_above: matrix is not square");
  if (n == 0) return {Vector(0), Matrix(0, 0)};

  // Eigenvalues of a PSD Gramian are bounded by its trace; any finite upper
  // limit above the spectrum works for the value-range driver.
  const double upper = std::max(2.0 * a.diagonal().cwiseAbs().sum(), lower) + 1.0;
  lapack_int found = 0;
  Vector w(n);
  Matrix z(n, n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', n, a.data(), n, lower, upper, 0, 0,
                                         0.0, &found, w.data(), z.data(), n, support.data());
  if (info != 0) throw NumericalError("dsyevr failed with info = " + std::to_string(info));
  return descending(w.head(found), z.leftCols(found));
}

SymmetricEigen symmetric_eigen(Matrix a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (a.rows() != a.cols()) throw NumericalError("symmetric_eigen: matrix is not square");
  if (n == 0) return {Vector(0), Matrix(0, 0)};
  Vector w(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
  if (info != 0) throw NumericalError("dsyevd failed with info = " + std::to_string(info));
  return descending(std::move(w), std::move(a));
}

ThinSvd thin_svd(Matrix a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  if (k == 0) return {Matrix(m, 0), Vector(0), Matrix(n, 0)};
  Matrix u(m, k);
  Vector s(k);
  Matrix vt(k, n);
  const lapack_int info =
      LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, a.data(), m, s.data(), u.data(), m, vt.data(), k);
  if (info != 0) throw NumericalError("dgesdd failed with info = " + std::to_string(info));
  return {std::move(u), std::move(s), vt.transpose()};
}

Vector singular_values(Matrix a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  if (k == 0) return Vector(0);
  Vector s(k);
  const lapack_int info =
      LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw NumericalError("dgesdd failed with info = " + std::to_string(info));
  return s;
}

}  // namespace hapod::linalg
