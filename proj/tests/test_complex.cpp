#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "polygauss/complex.hpp"

using namespace polygauss;
using namespace testutil;

namespace {

SimplicialComplex nerve_of(const HPolyhedron<double>& p) {
  return nerve(p, check_general_position(homogenize(p)));
}

long binomial(int n, int k) {
  long v = 1;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

}  // namespace

TEST_SUITE("complex") {

TEST_CASE("nerve of the unit square has nine faces") {
  const auto c = nerve_of(unit_square());
  const std::vector<FaceSet> expected = {{},     {1},    {2},    {3},   {4},
                                         {1, 3}, {1, 4}, {2, 3}, {2, 4}};
  REQUIRE(c.size() == 9);
  CHECK(holonomic_rank(c) == 9);
  for (const auto& J : expected) CHECK(c.contains(J));
  CHECK(c.face(0) == FaceSet{});
  CHECK_FALSE(c.contains({1, 2}));
  CHECK_FALSE(c.contains({3, 4}));
}

TEST_CASE("single half-space") {
  const auto c = nerve_of(halfspace(1));
  CHECK(c.size() == 2);
  CHECK(c.contains({}));
  CHECK(c.contains({1}));
}

TEST_CASE("triangle keeps every pair but not the triple") {
  const auto c = nerve_of(triangle());
  CHECK(c.size() == 7);
  CHECK(holonomic_rank(c) == 7);
  CHECK(c.contains({1, 2}));
  CHECK(c.contains({1, 3}));
  CHECK(c.contains({2, 3}));
  CHECK_FALSE(c.contains({1, 2, 3}));
}

TEST_CASE("nerve requires general position") {
  const auto p = strip3();
  const auto report = check_general_position(homogenize(p));
  CHECK_THROWS_AS((void)nerve(p, report), Error);
}

TEST_CASE("basis order is cardinality then lexicographic") {
  const auto c = nerve_of(unit_square());
  for (int i = 1; i < c.size(); ++i)
    CHECK(CardLexLess{}(c.face(i - 1), c.face(i)));
}

TEST_CASE("nerve matches brute-force face enumeration on random instances") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 2 + static_cast<int>(rng() % 3);  // 2..4
    const int n = 2 + static_cast<int>(rng() % 5);  // 2..6
    const auto p = random_general_position_instance(rng, d, n);
    const auto c = nerve_of(p);
    CHECK(c.size() == count_nonempty_faces(p));

    long bound = 0;
    for (int i = 0; i <= static_cast<int>(p.dim()); ++i)
      bound += binomial(static_cast<int>(p.n_constraints()), i);
    CHECK(c.size() <= bound);
    for (const auto& J : c.faces())
      CHECK(static_cast<Eigen::Index>(J.size()) <= p.dim());
  }
}

TEST_CASE("faces have the expected affine dimension") {
  // aff(F_J) must be (d - |J|)-dimensional: walk from a relative interior
  // point along a null-space basis of the face normals and stay inside P.
  for (const auto& p : {unit_square(), triangle()}) {
    const auto h = homogenize(p);
    const auto c = nerve_of(p);
    for (const auto& J : c.faces()) {
      const auto rip = relative_interior_point(h, J);
      REQUIRE(rip.has_value());
      REQUIRE((*rip)(0) > 0.0);
      const Eigen::VectorXd x0 = rip->tail(p.dim()) / (*rip)(0);

      Eigen::MatrixXd normals(p.dim(), static_cast<Eigen::Index>(J.size()));
      for (std::size_t k = 0; k < J.size(); ++k)
        normals.col(static_cast<Eigen::Index>(k)) = p.normal(J[k]);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(normals.transpose());
      lu.setThreshold(1e-9);
      Eigen::MatrixXd kernel;
      if (J.empty())
        kernel = Eigen::MatrixXd::Identity(p.dim(), p.dim());
      else if (lu.dimensionOfKernel() == 0)
        kernel = Eigen::MatrixXd::Zero(p.dim(), 0);
      else
        kernel = lu.kernel();
      REQUIRE(kernel.cols() == p.dim() - static_cast<Eigen::Index>(J.size()));

      for (Eigen::Index k = 0; k < kernel.cols(); ++k) {
        for (double sign : {1.0, -1.0}) {
          const Eigen::VectorXd x = x0 + sign * 1e-5 * kernel.col(k).normalized();
          for (int j = 1; j <= p.n_constraints(); ++j) {
            const double fj = p.evaluate(j, x);
            if (set_contains(J, j))
              CHECK(std::abs(fj) < 1e-9);
            else
              CHECK(fj > 0.0);
          }
        }
      }
    }
  }
}

TEST_CASE("complex construction rejects broken inputs") {
  CHECK_THROWS_AS(SimplicialComplex(2, {{1}, {2}}), std::invalid_argument);  // no {}
  CHECK_THROWS_AS(SimplicialComplex(2, {{}, {1, 2}}), std::invalid_argument);  // gap
  CHECK_THROWS_AS(SimplicialComplex(2, {{}, {1}, {1}}), std::invalid_argument);
}

}  // TEST_SUITE
