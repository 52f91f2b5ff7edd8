#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "polygauss/error.hpp"

namespace polygauss {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Polyhedron in H-representation, {x : a.col(j-1).dot(x) + b[j-1] >= 0 for j = 1..n}.
/// Constraint indices are 1-based throughout; column j-1 of `a` is the normal of
/// constraint j.
template <typename Scalar>
struct HPolyhedron {
  MatrixX<Scalar> a;  // d x n
  VectorX<Scalar> b;  // n

  HPolyhedron() = default;

  HPolyhedron(MatrixX<Scalar> a_in, VectorX<Scalar> b_in)
      : a(std::move(a_in)), b(std::move(b_in)) {
    if (a.rows() < 1 || a.cols() < 1)
      raise(ErrorCode::InvalidPolyhedron, "polyhedron needs d >= 1 and n >= 1");
    if (b.size() != a.cols())
      raise(ErrorCode::InvalidPolyhedron, "offset vector length must match constraint count");
    if (!a.allFinite() || !b.allFinite())
      raise(ErrorCode::InvalidPolyhedron, "polyhedron data must be finite");
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a.col(j).cwiseAbs().maxCoeff() == Scalar(0))
        raise(ErrorCode::InvalidPolyhedron,
              "constraint " + std::to_string(j + 1) + " has a zero normal");
    }
  }

  Eigen::Index dim() const { return a.rows(); }
  Eigen::Index n_constraints() const { return a.cols(); }

  auto normal(int j) const { return a.col(j - 1); }
  Scalar offset(int j) const { return b(j - 1); }

  /// f_j(x) = a_j . x + b_j
  Scalar evaluate(int j, const VectorX<Scalar>& x) const {
    return normal(j).dot(x) + offset(j);
  }
};

/// Homogenized family of half-space normals in R^{d+1}.  Column 0 is the added
/// half-space {x_0 >= 0}; column j (1..n) is (b_j, a_{1j}, ..., a_{dj})^T.
template <typename Scalar>
struct HomogenizedFamily {
  MatrixX<Scalar> columns;  // (d+1) x (n+1)

  Eigen::Index dim() const { return columns.rows() - 1; }
  Eigen::Index n_halfspaces() const { return columns.cols(); }  // n + 1, indices 0..n

  auto column(int j) const { return columns.col(j); }
};

template <typename Scalar>
HomogenizedFamily<Scalar> homogenize(const HPolyhedron<Scalar>& p) {
  const Eigen::Index d = p.dim();
  const Eigen::Index n = p.n_constraints();
  HomogenizedFamily<Scalar> h;
  h.columns.setZero(d + 1, n + 1);
  h.columns(0, 0) = Scalar(1);
  h.columns.block(0, 1, 1, n) = p.b.transpose();
  h.columns.block(1, 1, d, n) = p.a;
  return h;
}

}  // namespace polygauss
