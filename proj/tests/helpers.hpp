#pragma once

#include <cmath>
#include <random>

#include "polygauss/geometry.hpp"
#include "polygauss/simplex.hpp"
#include "polygauss/types.hpp"

namespace testutil {

using namespace polygauss;

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

/// P(X1 >= 0, X2 >= 0) for correlated standard normals.
inline double orthant_probability(double rho) {
  return 0.25 + std::asin(rho) / (2.0 * 3.14159265358979323846);
}

inline HPolyhedron<double> unit_square() {
  Eigen::MatrixXd a(2, 4);
  a << 1, -1, 0, 0,
       0, 0, 1, -1;
  Eigen::VectorXd b(4);
  b << 0, 1, 0, 1;
  return {a, b};
}

/// Unit square plus the redundant half-plane x1 + x2 >= 0.
inline HPolyhedron<double> unit_square_plus_diagonal() {
  Eigen::MatrixXd a(2, 5);
  a << 1, -1, 0, 0, 1,
       0, 0, 1, -1, 1;
  Eigen::VectorXd b(5);
  b << 0, 1, 0, 1, 0;
  return {a, b};
}

/// {0 <= x1 <= 1, x2 >= 0}: an unbounded strip, not in general position.
inline HPolyhedron<double> strip3() {
  Eigen::MatrixXd a(2, 3);
  a << 1, -1, 0,
       0, 0, 1;
  Eigen::VectorXd b(3);
  b << 0, 1, 0;
  return {a, b};
}

inline HPolyhedron<double> triangle() {
  Eigen::MatrixXd a(2, 3);
  a << 1, 0, -1,
       0, 1, -1;
  Eigen::VectorXd b(3);
  b << 0, 0, 1;
  return {a, b};
}

/// Standardized two-dimensional orthant problem with correlation rho.
inline HPolyhedron<double> orthant(double rho) {
  Eigen::MatrixXd a(2, 2);
  a << 1, rho,
       0, std::sqrt(1.0 - rho * rho);
  return {a, Eigen::VectorXd::Zero(2)};
}

inline HPolyhedron<double> halfspace(int d) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, 1);
  a(0, 0) = 1.0;
  return {a, Eigen::VectorXd::Zero(1)};
}

/// Wedge whose vertex {1,2} leaves the polyhedron under uniform inflation of
/// the offsets; exercises integration paths that cross a nerve wall.
inline HPolyhedron<double> shifting_wedge() {
  Eigen::MatrixXd a(2, 3);
  a << 1, 0.6, 1.3,
       0, 0.8, -0.4;
  Eigen::VectorXd b(3);
  b << 0, 0, 0.05;
  return {a, b};
}

/// Independent oracle: F_J != {} decided by direct LP feasibility in the
/// original coordinates (max t with f_j = 0 on J, f_k >= t off J, t <= 1).
inline bool face_nonempty(const HPolyhedron<double>& p, const FaceSet& J) {
  const Eigen::Index d = p.dim();
  const int n = static_cast<int>(p.n_constraints());
  auto lp = LpProblem<double>::with_variables(d + 1);
  lp.upper(d) = 1.0;
  lp.objective(d) = 1.0;

  lp.eq_lhs.setZero(static_cast<Eigen::Index>(J.size()), d + 1);
  lp.eq_rhs.setZero(static_cast<Eigen::Index>(J.size()));
  for (std::size_t k = 0; k < J.size(); ++k) {
    lp.eq_lhs.row(static_cast<Eigen::Index>(k)).head(d) = p.normal(J[k]).transpose();
    lp.eq_rhs(static_cast<Eigen::Index>(k)) = -p.offset(J[k]);
  }
  const Eigen::Index rows = n - static_cast<Eigen::Index>(J.size());
  lp.ge_lhs.setZero(rows, d + 1);
  lp.ge_rhs.setZero(rows);
  Eigen::Index r = 0;
  for (int k = 1; k <= n; ++k) {
    if (set_contains(J, k)) continue;
    lp.ge_lhs.row(r).head(d) = p.normal(k).transpose();
    lp.ge_lhs(r, d) = -1.0;
    lp.ge_rhs(r) = -p.offset(k);
    ++r;
  }
  const auto sol = solve_lp(lp);
  return sol.status == LpStatus::Optimal && sol.objective >= -1e-9;
}

/// Brute-force count of nonempty faces over every J in [n], including {}.
inline int count_nonempty_faces(const HPolyhedron<double>& p) {
  const int n = static_cast<int>(p.n_constraints());
  int count = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    FaceSet J;
    for (int j = 1; j <= n; ++j)
      if (mask & (1u << (j - 1))) J.push_back(j);
    if (face_nonempty(p, J)) ++count;
  }
  return count;
}

/// Random polyhedron with the origin strictly inside; the caller strips and
/// filters for general position.
inline HPolyhedron<double> random_polyhedron(std::mt19937_64& rng, int d, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> off(0.2, 1.5);
  while (true) {
    Eigen::MatrixXd a(d, n);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
    bool ok = true;
    for (int j = 0; j < n; ++j)
      if (a.col(j).norm() < 0.3) ok = false;
    if (!ok) continue;
    Eigen::VectorXd b(n);
    for (int j = 0; j < n; ++j) b(j) = off(rng);
    return {a, b};
  }
}

/// Draws a random instance that survives strip_redundant and the
/// general-position check; deterministic for a seeded engine.
inline HPolyhedron<double> random_general_position_instance(std::mt19937_64& rng, int d,
                                                            int n) {
  while (true) {
    auto raw = random_polyhedron(rng, d, n);
    auto strip = strip_redundant(raw);
    if (strip.polyhedron.n_constraints() < 1) continue;
    const auto report = check_general_position(homogenize(strip.polyhedron));
    if (report.in_general_position) return strip.polyhedron;
  }
}

}  // namespace testutil
