#pragma once

#include <Eigen/Dense>
#include <vector>

#include "polygauss/complex.hpp"
#include "polygauss/types.hpp"

namespace polygauss {

/// Gram matrix of the constraint normals together with the inverse and the
/// determinant of every face submatrix alpha_J, J in the complex.  Entries are
/// addressed with 1-based constraint indices.
template <typename Scalar>
struct GramCache {
  MatrixX<Scalar> alpha;                     // n x n
  std::vector<MatrixX<Scalar>> sub_inverse;  // by face index; 0 x 0 for {}
  std::vector<Scalar> sub_determinant;       // det alpha_J; 1 for {}

  Scalar entry(int j, int k) const { return alpha(j - 1, k - 1); }
};

namespace detail {

// Cholesky with an explicit pivot floor; failure marks the singular locus.
template <typename Scalar>
bool cholesky_with_floor(const MatrixX<Scalar>& m, MatrixX<Scalar>* lower,
                         Scalar* det) {
  const Eigen::Index s = m.rows();
  const Scalar floor = Scalar(1e-12) * m.trace();
  MatrixX<Scalar> L = MatrixX<Scalar>::Zero(s, s);
  Scalar d = Scalar(1);
  for (Eigen::Index i = 0; i < s; ++i) {
    Scalar pivot = m(i, i) - L.row(i).head(i).squaredNorm();
    if (pivot <= floor) return false;
    L(i, i) = std::sqrt(pivot);
    d *= pivot;
    for (Eigen::Index k = i + 1; k < s; ++k)
      L(k, i) = (m(k, i) - L.row(k).head(i).dot(L.row(i).head(i))) / L(i, i);
  }
  *lower = std::move(L);
  *det = d;
  return true;
}

}  // namespace detail

template <typename Scalar>
GramCache<Scalar> gram_cache(const HPolyhedron<Scalar>& p, const SimplicialComplex& c) {
  GramCache<Scalar> cache;
  cache.alpha = p.a.transpose() * p.a;
  cache.sub_inverse.resize(static_cast<std::size_t>(c.size()));
  cache.sub_determinant.assign(static_cast<std::size_t>(c.size()), Scalar(1));

  for (int fi = 0; fi < c.size(); ++fi) {
    const FaceSet& J = c.face(fi);
    const Eigen::Index s = static_cast<Eigen::Index>(J.size());
    if (s == 0) {
      cache.sub_inverse[static_cast<std::size_t>(fi)] = MatrixX<Scalar>(0, 0);
      continue;
    }
    MatrixX<Scalar> sub(s, s);
    for (Eigen::Index r = 0; r < s; ++r)
      for (Eigen::Index q = 0; q < s; ++q)
        sub(r, q) = cache.entry(J[static_cast<std::size_t>(r)], J[static_cast<std::size_t>(q)]);

    MatrixX<Scalar> L;
    Scalar det = Scalar(0);
    if (!detail::cholesky_with_floor(sub, &L, &det))
      raise(ErrorCode::SingularGram,
            "gram submatrix for face " + to_string(J) + " is numerically singular");
    const MatrixX<Scalar> linv =
        L.template triangularView<Eigen::Lower>().solve(MatrixX<Scalar>::Identity(s, s));
    cache.sub_inverse[static_cast<std::size_t>(fi)] = linv.transpose() * linv;
    cache.sub_determinant[static_cast<std::size_t>(fi)] = det;
  }
  return cache;
}

}  // namespace polygauss
