#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "polygauss/gram.hpp"

namespace polygauss {

/// The coefficient-matrix generator for the first-order system satisfied by
/// the state vector g = (g^J), J running over the complex in basis order.
/// Row/column i corresponds to complex.face(i); component 0 (the empty set)
/// is the probability itself.
template <typename Scalar>
struct PfaffianSystem {
  SimplicialComplex complex;
  HPolyhedron<Scalar> polyhedron;  // supplies a (and the target b)
  GramCache<Scalar> gram;
  int dimension = 0;
};

template <typename Scalar>
PfaffianSystem<Scalar> build_system(const HPolyhedron<Scalar>& p,
                                    const SimplicialComplex& c) {
  PfaffianSystem<Scalar> sys;
  sys.complex = c;
  sys.polyhedron = p;
  sys.gram = gram_cache(p, c);
  sys.dimension = holonomic_rank(c);
  return sys;
}

/// Coefficient matrix B_j of the derivative in b_j, evaluated at offset vector
/// b.  Row J reads:
///   j not in J:  one at column J+{j} when that face exists, else zero;
///   j in J:      -sum_{k in J} inv(alpha_J)_{jk} b_k at column J, and
///                -sum_{k in J} inv(alpha_J)_{jk} alpha_{kl} at column J+{l}
///                for l outside J whose union is a face.
/// Entries are affine in b; the only b-dependence sits on the diagonal blocks.
template <typename Scalar>
MatrixX<Scalar> b_direction_matrix(const PfaffianSystem<Scalar>& sys, int j,
                                   const VectorX<Scalar>& b) {
  const int m = sys.dimension;
  const int n = static_cast<int>(sys.polyhedron.n_constraints());
  MatrixX<Scalar> B = MatrixX<Scalar>::Zero(m, m);

  for (int row = 0; row < m; ++row) {
    const FaceSet& J = sys.complex.face(row);
    if (!set_contains(J, j)) {
      const int col = sys.complex.index_of(with_element(J, j));
      if (col >= 0) B(row, col) = Scalar(1);
      continue;
    }
    const MatrixX<Scalar>& inv = sys.gram.sub_inverse[static_cast<std::size_t>(row)];
    const Eigen::Index pj = static_cast<Eigen::Index>(
        std::lower_bound(J.begin(), J.end(), j) - J.begin());

    Scalar diag = Scalar(0);
    for (std::size_t q = 0; q < J.size(); ++q)
      diag -= inv(pj, static_cast<Eigen::Index>(q)) * b(J[q] - 1);
    B(row, row) = diag;

    for (int l = 1; l <= n; ++l) {
      if (set_contains(J, l)) continue;
      const int col = sys.complex.index_of(with_element(J, l));
      if (col < 0) continue;
      Scalar coupling = Scalar(0);
      for (std::size_t q = 0; q < J.size(); ++q)
        coupling -= inv(pj, static_cast<Eigen::Index>(q)) * sys.gram.entry(J[q], l);
      B(row, col) = coupling;
    }
  }
  return B;
}

/// Exact derivative of B_j in b_k: constant, nonzero only at diagonal entries
/// of rows J containing both j and k.
template <typename Scalar>
MatrixX<Scalar> b_direction_derivative(const PfaffianSystem<Scalar>& sys, int j, int k) {
  const int m = sys.dimension;
  MatrixX<Scalar> D = MatrixX<Scalar>::Zero(m, m);
  for (int row = 0; row < m; ++row) {
    const FaceSet& J = sys.complex.face(row);
    if (!set_contains(J, j) || !set_contains(J, k)) continue;
    const MatrixX<Scalar>& inv = sys.gram.sub_inverse[static_cast<std::size_t>(row)];
    const Eigen::Index pj = static_cast<Eigen::Index>(
        std::lower_bound(J.begin(), J.end(), j) - J.begin());
    const Eigen::Index pk = static_cast<Eigen::Index>(
        std::lower_bound(J.begin(), J.end(), k) - J.begin());
    D(row, row) = -inv(pj, pk);
  }
  return D;
}

/// Coefficient matrix of the derivative in a_{ij}: the first-order reduction
/// of sum_k a_{ik} d/db_k d/db_j, assembled as
///   C = sum_k a_{ik} (dB_j/db_k + B_j B_k).
template <typename Scalar>
MatrixX<Scalar> a_direction_matrix(const PfaffianSystem<Scalar>& sys, int i, int j,
                                   const VectorX<Scalar>& b) {
  const int n = static_cast<int>(sys.polyhedron.n_constraints());
  const MatrixX<Scalar> Bj = b_direction_matrix(sys, j, b);
  MatrixX<Scalar> C = MatrixX<Scalar>::Zero(sys.dimension, sys.dimension);
  for (int k = 1; k <= n; ++k) {
    const Scalar aik = sys.polyhedron.a(i - 1, k - 1);
    if (aik == Scalar(0)) continue;
    C += aik * (b_direction_derivative(sys, j, k) + Bj * b_direction_matrix(sys, k, b));
  }
  return C;
}

/// A coordinate of the (a, b) parameter space: b_j when i == 0, else a_{ij}.
struct Coordinate {
  int i = 0;
  int j = 0;
  bool is_b() const { return i == 0; }
};
inline Coordinate b_coord(int j) { return {0, j}; }
inline Coordinate a_coord(int i, int j) { return {i, j}; }

namespace detail {

template <typename Scalar>
PfaffianSystem<Scalar> system_at(const PfaffianSystem<Scalar>& sys,
                                 const MatrixX<Scalar>& a) {
  if ((a - sys.polyhedron.a).cwiseAbs().maxCoeff() == Scalar(0)) return sys;
  return build_system(HPolyhedron<Scalar>(a, sys.polyhedron.b), sys.complex);
}

template <typename Scalar>
MatrixX<Scalar> coefficient_matrix(const PfaffianSystem<Scalar>& sys,
                                   const MatrixX<Scalar>& a, const VectorX<Scalar>& b,
                                   Coordinate c) {
  const PfaffianSystem<Scalar> local = system_at(sys, a);
  return c.is_b() ? b_direction_matrix(local, c.j, b)
                  : a_direction_matrix(local, c.i, c.j, b);
}

// Derivative of the coefficient matrix for `target` in direction `wrt`.
// b-derivatives of the affine-in-b matrices are exact; everything else uses
// central differences with step 1e-5 * (1 + |coordinate|).
template <typename Scalar>
MatrixX<Scalar> coefficient_derivative(const PfaffianSystem<Scalar>& sys,
                                       const VectorX<Scalar>& b, Coordinate target,
                                       Coordinate wrt) {
  if (target.is_b() && wrt.is_b()) return b_direction_derivative(sys, target.j, wrt.j);

  const MatrixX<Scalar>& a0 = sys.polyhedron.a;
  if (wrt.is_b()) {
    const Scalar h = Scalar(1e-5) * (Scalar(1) + std::abs(b(wrt.j - 1)));
    VectorX<Scalar> bp = b, bm = b;
    bp(wrt.j - 1) += h;
    bm(wrt.j - 1) -= h;
    return (coefficient_matrix(sys, a0, bp, target) -
            coefficient_matrix(sys, a0, bm, target)) /
           (2 * h);
  }
  const Scalar h = Scalar(1e-5) * (Scalar(1) + std::abs(a0(wrt.i - 1, wrt.j - 1)));
  MatrixX<Scalar> ap = a0, am = a0;
  ap(wrt.i - 1, wrt.j - 1) += h;
  am(wrt.i - 1, wrt.j - 1) -= h;
  return (coefficient_matrix(sys, ap, b, target) -
          coefficient_matrix(sys, am, b, target)) /
         (2 * h);
}

}  // namespace detail

/// Residual |d1 c2 + c2 c1 - d2 c1 - c1 c2|_inf of the integrability condition
/// for the coefficient matrices of the two coordinates at (a, b).
template <typename Scalar>
Scalar integrability_residual(const PfaffianSystem<Scalar>& sys, const VectorX<Scalar>& b,
                              Coordinate dir1, Coordinate dir2) {
  const MatrixX<Scalar>& a = sys.polyhedron.a;
  const MatrixX<Scalar> c1 = detail::coefficient_matrix(sys, a, b, dir1);
  const MatrixX<Scalar> c2 = detail::coefficient_matrix(sys, a, b, dir2);
  const MatrixX<Scalar> d1c2 = detail::coefficient_derivative(sys, b, dir2, dir1);
  const MatrixX<Scalar> d2c1 = detail::coefficient_derivative(sys, b, dir1, dir2);
  return (d1c2 + c2 * c1 - d2c1 - c1 * c2).cwiseAbs().maxCoeff();
}

/// Max residual of the defining relation
///   b_j g^J + sum_k alpha_{jk} (d/db_k g^J) = 0   (j in J)
/// checked as a row identity of the assembled matrices.
template <typename Scalar>
Scalar gram_identity_residual(const PfaffianSystem<Scalar>& sys, const VectorX<Scalar>& b) {
  const int n = static_cast<int>(sys.polyhedron.n_constraints());
  std::vector<MatrixX<Scalar>> B;
  B.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) B.push_back(b_direction_matrix(sys, k, b));

  Scalar worst = Scalar(0);
  for (int row = 0; row < sys.dimension; ++row) {
    const FaceSet& J = sys.complex.face(row);
    for (int j : J) {
      VectorX<Scalar> acc = VectorX<Scalar>::Zero(sys.dimension);
      acc(row) = b(j - 1);
      for (int k = 1; k <= n; ++k)
        acc += sys.gram.entry(j, k) * B[static_cast<std::size_t>(k - 1)].row(row).transpose();
      worst = std::max(worst, acc.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

template <typename Scalar>
struct SingularDistance {
  Scalar value = Scalar(0);      // min_J det alpha_J over nonempty faces
  Scalar threshold = Scalar(0);  // warning level, scale aware
  bool warning = false;
};

/// Scale-aware proxy for the distance to the singular locus:
/// min over nonempty faces of det alpha_J, flagged when it drops below
/// 1e-8 times the geometric mean of the Gram diagonal.
template <typename Scalar>
SingularDistance<Scalar> singular_distance(const PfaffianSystem<Scalar>& sys) {
  SingularDistance<Scalar> out;
  Scalar log_mean = Scalar(0);
  const Eigen::Index n = sys.gram.alpha.rows();
  for (Eigen::Index j = 0; j < n; ++j) log_mean += std::log(sys.gram.alpha(j, j));
  out.threshold = Scalar(1e-8) * std::exp(log_mean / Scalar(n));

  out.value = std::numeric_limits<Scalar>::infinity();
  for (int fi = 1; fi < sys.dimension; ++fi)
    out.value = std::min(out.value, sys.gram.sub_determinant[static_cast<std::size_t>(fi)]);
  if (sys.dimension <= 1) out.value = Scalar(1);
  out.warning = out.value < out.threshold;
  return out;
}

}  // namespace polygauss
