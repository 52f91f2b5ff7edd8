#include <doctest.h>

#include "helpers.hpp"
#include "polygauss/complex.hpp"
#include "polygauss/oracle.hpp"

using namespace polygauss;
using namespace testutil;

namespace {

SimplicialComplex nerve_of(const HPolyhedron<double>& p) {
  return nerve(p, check_general_position(homogenize(p)));
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("half-space estimate brackets one half") {
  const auto est = estimate_phi(halfspace(2), 200000, 7);
  CHECK(std::abs(est.value - 0.5) < 3 * est.std_error);
  CHECK(est.std_error == doctest::Approx(std::sqrt(0.25 / 200000)).epsilon(0.05));
}

TEST_CASE("unit square estimate matches the product form") {
  const double expected = std::pow(normal_cdf(1.0) - normal_cdf(0.0), 2);
  const auto est = estimate_phi(unit_square(), 1000000, 1);
  CHECK(std::abs(est.value - expected) < 4 * est.std_error);
  CHECK(est.std_error < 1e-3);
}

TEST_CASE("empty polyhedron estimates zero") {
  Eigen::MatrixXd a(1, 2);
  a << 1, -1;
  Eigen::VectorXd b(2);
  b << -1, 0;
  const auto est = estimate_phi(HPolyhedron<double>(a, b), 10000, 3);
  CHECK(est.value == 0.0);
}

TEST_CASE("inclusion-exclusion terms") {
  SUBCASE("empty face integrates the constant exactly") {
    const auto est = estimate_phi_F(unit_square(), {}, 5000, 11);
    CHECK(est.value == 1.0);
    CHECK(est.std_error == 0.0);
  }
  SUBCASE("single face gives the negative tail") {
    const auto est = estimate_phi_F(unit_square(), {1}, 1000000, 11);
    CHECK(std::abs(est.value - (-0.5)) < 4 * est.std_error);
  }
  SUBCASE("pair gives the positive corner mass") {
    const auto est = estimate_phi_F(unit_square(), {1, 3}, 1000000, 11);
    CHECK(std::abs(est.value - 0.25) < 4 * est.std_error);
  }
}

TEST_CASE("decomposition residual is accumulation-level") {
  CHECK(check_decomposition(unit_square(), nerve_of(unit_square()), 100000, 5) < 1e-12);
  CHECK(check_decomposition(halfspace(1), nerve_of(halfspace(1)), 100000, 5) < 1e-15);
  CHECK(check_decomposition(triangle(), nerve_of(triangle()), 100000, 5) < 1e-12);
  CHECK(check_decomposition(shifting_wedge(), nerve_of(shifting_wedge()), 100000, 5) <
        1e-12);
}

TEST_CASE("finite-difference derivatives") {
  SUBCASE("one-dimensional density") {
    const double fd = fd_derivative(halfspace(1), {1}, 1e-2, 4000000, 13);
    CHECK(std::abs(fd - normal_pdf(0.0)) < 0.01);
  }
  SUBCASE("empty index set falls back to the plain estimate") {
    const double v = fd_derivative(unit_square(), {}, 1e-2, 50000, 13);
    CHECK(v == estimate_phi(unit_square(), 50000, 13).value);
  }
  SUBCASE("mixed difference matches the mixed derivative sign and size") {
    // d^2/db1 db3 of Phi-product at the square's offsets: N(0) * N(0)
    const double fd = fd_derivative(unit_square(), {1, 3}, 5e-2, 4000000, 13);
    CHECK(std::abs(fd - normal_pdf(0.0) * normal_pdf(0.0)) < 0.02);
  }
  SUBCASE("orders above two are rejected") {
    CHECK_THROWS_AS((void)fd_derivative(unit_square(), {1, 2, 3}, 1e-2, 1000, 13),
                    std::invalid_argument);
  }
}

TEST_CASE("estimates are bit-identical for a fixed seed") {
  const auto a = estimate_phi(triangle(), 100000, 123);
  const auto b = estimate_phi(triangle(), 100000, 123);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  const auto fa = estimate_phi_F(triangle(), {1, 2}, 50000, 9);
  const auto fb = estimate_phi_F(triangle(), {1, 2}, 50000, 9);
  CHECK(fa.value == fb.value);
}

TEST_CASE("thread count does not move the estimate") {
#ifdef _WIN32
  return;
#else
  setenv("POLYGAUSS_THREADS", "1", 1);
  const auto seq = estimate_phi(unit_square(), 300000, 77);
  setenv("POLYGAUSS_THREADS", "7", 1);
  const auto par = estimate_phi(unit_square(), 300000, 77);
  unsetenv("POLYGAUSS_THREADS");
  CHECK(seq.value == par.value);
  CHECK(seq.std_error == par.std_error);
#endif
}

TEST_CASE("normal-interval coverage over seeded repetitions") {
  // 0.5 must fall within 3 standard errors in at least 99% of 200 runs
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto est = estimate_phi(halfspace(1), 20000, seed);
    if (std::abs(est.value - 0.5) <= 3 * est.std_error) ++covered;
  }
  CHECK(covered >= 198);
}

TEST_CASE("lattice-rule estimate agrees and tightens") {
  const double expected = std::pow(normal_cdf(1.0) - normal_cdf(0.0), 2);
  const auto qmc = estimate_phi(unit_square(), 320000, 17, OracleMethod::QMC);
  CHECK(qmc.method == OracleMethod::QMC);
  CHECK(std::abs(qmc.value - expected) < 5 * qmc.std_error + 1e-4);
  const auto mc = estimate_phi(unit_square(), 320000, 17);
  CHECK(qmc.std_error < mc.std_error);
}

TEST_CASE("inverse normal cdf inverts the cdf") {
  for (double x : {-7.5, -3.0, -1.0, -0.1, 0.0, 0.4, 2.2, 6.0}) {
    CHECK(inverse_normal_cdf(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-10));
  }
}

}  // TEST_SUITE
