#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "polygauss/hgm.hpp"
#include "polygauss/oracle.hpp"

using namespace polygauss;
using namespace testutil;

namespace {

PfaffianSystem<double> system_of(const HPolyhedron<double>& p) {
  const auto report = check_general_position(homogenize(p));
  return build_system(p, nerve(p, report));
}

GaussianProblem<double> plain(const HPolyhedron<double>& p) { return {p, {}, {}}; }

}  // namespace

TEST_SUITE("hgm") {

TEST_CASE("standardize") {
  SUBCASE("explicit zero mean and identity covariance change nothing") {
    GaussianProblem<double> gp{unit_square(), Eigen::VectorXd::Zero(2),
                               Eigen::MatrixXd::Identity(2, 2)};
    const auto q = standardize(gp);
    CHECK(q.a.isApprox(unit_square().a));
    CHECK(q.b.isApprox(unit_square().b));
  }
  SUBCASE("univariate shift and scale") {
    Eigen::MatrixXd a(1, 1);
    a << 1;
    Eigen::VectorXd mean(1);
    mean << 1;
    Eigen::MatrixXd cov(1, 1);
    cov << 4;
    GaussianProblem<double> gp{HPolyhedron<double>(a, Eigen::VectorXd::Zero(1)), mean, cov};
    const auto q = standardize(gp);
    CHECK(q.a(0, 0) == doctest::Approx(2.0));
    CHECK(q.b(0) == doctest::Approx(1.0));
    const auto prob = compute_probability(gp);
    CHECK(prob.probability == doctest::Approx(normal_cdf(0.5)).epsilon(1e-7));
  }
  SUBCASE("orthant covariance reappears as the gram matrix") {
    const double rho = 0.6;
    Eigen::MatrixXd cov(2, 2);
    cov << 1, rho, rho, 1;
    GaussianProblem<double> gp{halfspace(2), {}, cov};
    Eigen::MatrixXd a2(2, 2);
    a2 << 1, 0, 0, 1;
    gp.polyhedron = HPolyhedron<double>(a2, Eigen::VectorXd::Zero(2));
    const auto q = standardize(gp);
    CHECK((q.a.transpose() * q.a).isApprox(cov, 1e-12));
  }
  SUBCASE("indefinite covariance is rejected") {
    Eigen::MatrixXd cov(2, 2);
    cov << 1, 2, 2, 1;
    GaussianProblem<double> gp{unit_square(), {}, cov};
    CHECK_THROWS_AS((void)standardize(gp), Error);
  }
}

TEST_CASE("initial state and inscribed radius") {
  const auto sys = system_of(unit_square());
  const Eigen::VectorXd b = unit_square().b;

  const auto y = initial_state(sys, b, 10.0);
  CHECK(y(0) == doctest::Approx(1.0).epsilon(1e-12));
  // derivative components are seeded with the face-flat Gaussian densities:
  // tiny but strictly positive, never exact zeros
  CHECK(y.tail(sys.dimension - 1).cwiseAbs().maxCoeff() < 1e-20);
  CHECK(y.tail(sys.dimension - 1).minCoeff() > 0.0);
  CHECK(inscribed_radius(sys, b, 10.0) == doctest::Approx(10.0));

  CHECK_NOTHROW((void)initial_state(sys, b, 8.0));   // r = 8
  CHECK_THROWS_AS((void)initial_state(sys, b, 3.0), Error);  // r = 3 < 6

  const auto sys1 = system_of(halfspace(1));
  const Eigen::VectorXd zero1 = Eigen::VectorXd::Zero(1);
  const auto y1 = initial_state(sys1, zero1, 10.0);
  CHECK(y1(1) == doctest::Approx(normal_pdf(10.0)).epsilon(1e-12));
}

TEST_CASE("one-dimensional integration reaches the closed form") {
  const auto sys = system_of(halfspace(1));
  Eigen::VectorXd from(1), to(1);
  from << 10.0;
  to << 0.0;
  Eigen::Vector2d y0(1.0, normal_pdf(10.0));
  HgmConfig cfg;
  cfg.abs_tol = 1e-40;  // the density component must be tracked relatively
  const auto y = integrate(sys, from, to, VectorX<double>(y0), cfg);
  CHECK(y(0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(y(1) == doctest::Approx(normal_pdf(0.0)).epsilon(1e-8));
}

TEST_CASE("zero-length path returns the state unchanged") {
  const auto sys = system_of(triangle());
  Eigen::VectorXd y0 = Eigen::VectorXd::Random(sys.dimension);
  const auto y = integrate(sys, triangle().b, triangle().b, y0);
  CHECK(y.isApprox(y0));
}

TEST_CASE("unit square probability from the far field") {
  const auto sys = system_of(unit_square());
  const Eigen::VectorXd b = unit_square().b;
  const Eigen::VectorXd start = b + 10.0 * Eigen::VectorXd::Ones(4);
  HgmConfig cfg;
  cfg.abs_tol = 1e-60;
  const auto y = integrate(sys, start, b, initial_state(sys, b, 10.0), cfg);
  const double expected = std::pow(normal_cdf(1.0) - normal_cdf(0.0), 2);
  CHECK(y(0) == doctest::Approx(expected).epsilon(1e-7));
}

TEST_CASE("pipeline closed forms") {
  SUBCASE("half-space is one half") {
    for (int d : {1, 2, 3}) {
      const auto r = compute_probability(plain(halfspace(d)));
      CHECK(r.probability == doctest::Approx(0.5).epsilon(1e-9));
      CHECK(r.diagnostics.rank == 2);
    }
  }
  SUBCASE("unit square") {
    const auto r = compute_probability(plain(unit_square()));
    const double expected = std::pow(normal_cdf(1.0) - normal_cdf(0.0), 2);
    CHECK(std::abs(r.probability - expected) < 1e-6);
    CHECK(r.diagnostics.rank == 9);
    CHECK(r.diagnostics.doubling_gap <= 1e-8);
  }
  SUBCASE("correlated orthants") {
    for (double rho : {-0.9, -0.5, 0.0, 0.3, 0.5, 0.9}) {
      const auto r = compute_probability(plain(orthant(rho)));
      CHECK(std::abs(r.probability - orthant_probability(rho)) < 1e-6);
    }
  }
  SUBCASE("redundant constraint is stripped inside the pipeline") {
    const auto r = compute_probability(plain(unit_square_plus_diagonal()));
    const double expected = std::pow(normal_cdf(1.0) - normal_cdf(0.0), 2);
    CHECK(std::abs(r.probability - expected) < 1e-6);
    CHECK(r.diagnostics.removed_redundant == FaceSet{5});
  }
  SUBCASE("strip that is not in general position is refused") {
    CHECK_THROWS_AS((void)compute_probability(plain(strip3())), Error);
  }
}

TEST_CASE("integration across a nerve wall still lands on the probability") {
  // Inflating the wedge's offsets removes vertex {1,2} beyond c = 0.5, so the
  // default far-field path crosses a combinatorial wall; the computed branch
  // must still agree with a direct Monte-Carlo estimate at the target.
  const auto p = shifting_wedge();
  const auto report = check_general_position(homogenize(p));
  REQUIRE(report.in_general_position);
  REQUIRE(strip_redundant(p).removed.empty());
  const auto c = nerve(p, report);
  REQUIRE(c.contains({1, 2}));

  const auto r = compute_probability(plain(p));
  const auto mc = estimate_phi(p, 4000000, 99);
  CHECK(std::abs(r.probability - mc.value) < 4 * mc.std_error + 1e-6);
}

TEST_CASE("state components are the derivatives of the probability") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 3; ++rep) {
    const int d = 2 + static_cast<int>(rng() % 2);
    const int n = 2 + static_cast<int>(rng() % 3);
    const auto p = random_general_position_instance(rng, d, n);
    const auto base = compute_probability(plain(p));
    const double h = 1e-3;
    for (int j = 1; j <= p.n_constraints(); ++j) {
      GaussianProblem<double> up{p, {}, {}}, dn{p, {}, {}};
      up.polyhedron.b(j - 1) += h;
      dn.polyhedron.b(j - 1) -= h;
      const double fd =
          (compute_probability(up).probability - compute_probability(dn).probability) /
          (2 * h);
      const int idx = base.diagnostics.faces.empty()
                          ? -1
                          : [&] {
                              for (std::size_t k = 0; k < base.diagnostics.faces.size(); ++k)
                                if (base.diagnostics.faces[k] == FaceSet{j})
                                  return static_cast<int>(k);
                              return -1;
                            }();
      REQUIRE(idx >= 0);
      const double g = base.diagnostics.final_state(idx);
      CHECK(std::abs(fd - g) < std::max(1e-5, 1e-3 * std::abs(g)));
    }
  }
}

TEST_CASE("axis legs agree with the diagonal path") {
  const auto sys = system_of(triangle());
  const Eigen::VectorXd b = triangle().b;
  const double t = 12.0;
  const Eigen::VectorXd start = b + t * Eigen::VectorXd::Ones(3);
  const auto y0 = initial_state(sys, b, t);
  HgmConfig cfg;
  cfg.abs_tol = 1e-80;

  const auto direct = integrate(sys, start, b, y0, cfg);

  Eigen::VectorXd cur = start;
  VectorX<double> y = y0;
  for (int j = 0; j < 3; ++j) {
    Eigen::VectorXd next = cur;
    next(j) = b(j);
    y = integrate(sys, cur, next, y, cfg);
    cur = next;
  }
  CHECK((direct - y).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("probability grows weakly in every offset") {
  std::mt19937_64 rng(31);
  const auto p = random_general_position_instance(rng, 2, 4);
  const double base = compute_probability(plain(p)).probability;
  for (int j = 1; j <= p.n_constraints(); ++j) {
    GaussianProblem<double> up{p, {}, {}};
    up.polyhedron.b(j - 1) += 0.25;
    CHECK(compute_probability(up).probability >= base - 1e-9);
  }
}

TEST_CASE("shrinking the square toward empty drives the mass to zero") {
  double prev = 1.0;
  for (double shift : {0.0, -0.1, -0.2, -0.3}) {
    GaussianProblem<double> gp = plain(unit_square());
    gp.polyhedron.b.array() += shift;
    const double prob = compute_probability(gp).probability;
    CHECK(prob <= prev + 1e-9);
    prev = prob;
    if (shift == -0.3) {
      const double expected = std::pow(normal_cdf(0.7) - normal_cdf(0.3), 2);
      CHECK(prob == doctest::Approx(expected).epsilon(1e-6));
    }
  }
}

TEST_CASE("continuation in a") {
  SUBCASE("identical endpoints return the state") {
    const auto sys = system_of(orthant(0.0));
    Eigen::VectorXd y0 = Eigen::VectorXd::Random(sys.dimension);
    const Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
    const auto y = continue_in_a(sys.complex, sys.polyhedron.a, sys.polyhedron.a, zero2, y0);
    CHECK(y.isApprox(y0));
  }
  SUBCASE("independent orthant continues to the correlated one") {
    const auto sys0 = system_of(orthant(0.0));
    const Eigen::VectorXd b = Eigen::VectorXd::Zero(2);
    // product state at rho = 0: phi = 1/4, dphi/db_j = N(0) Phi(0), mixed = N(0)^2
    VectorX<double> y0(4);
    y0 << 0.25, normal_pdf(0) * 0.5, normal_pdf(0) * 0.5, normal_pdf(0) * normal_pdf(0);
    const Eigen::MatrixXd a_from = orthant(0.0).a;
    const Eigen::MatrixXd a_to = orthant(0.5).a;
    const auto y = continue_in_a(sys0.complex, a_from, a_to, b, y0);
    CHECK(std::abs(y(0) - orthant_probability(0.5)) < 1e-5);
  }
  SUBCASE("path into the singular locus is refused") {
    const auto sys0 = system_of(orthant(0.0));
    Eigen::MatrixXd degenerate(2, 2);
    degenerate << 1, 1, 0, 0;  // rho -> 1
    VectorX<double> y0 = VectorX<double>::Zero(4);
    y0(0) = 0.25;
    const Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
    const Eigen::MatrixXd a0 = orthant(0.0).a;
    CHECK_THROWS_AS((void)continue_in_a(sys0.complex, a0, degenerate, zero2, y0), Error);
  }
}

TEST_CASE("probability component stays within the unit interval") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 4; ++rep) {
    const auto p = random_general_position_instance(rng, 3, 5);
    const auto r = compute_probability(plain(p));
    CHECK(r.probability >= -1e-6);
    CHECK(r.probability <= 1.0 + 1e-6);
    CHECK(r.diagnostics.final_state.allFinite());
  }
}

}  // TEST_SUITE
