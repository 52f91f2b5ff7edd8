#pragma once

#include <Eigen/Dense>
#include <optional>

#include "polygauss/ode.hpp"
#include "polygauss/pfaffian.hpp"

namespace polygauss {

/// Probability problem in raw coordinates: P(X in polyhedron) for
/// X ~ N(mean, covariance).  Empty mean/covariance stand for 0 and identity.
template <typename Scalar>
struct GaussianProblem {
  HPolyhedron<Scalar> polyhedron;
  VectorX<Scalar> mean;        // length d, or empty
  MatrixX<Scalar> covariance;  // d x d symmetric positive definite, or empty
};

struct HgmConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double init_tol = 1e-8;  // doubling-gap acceptance for the far-field start
  std::optional<double> shift_t;
  int max_retries = 3;
};

template <typename Scalar>
struct HgmDiagnostics {
  int rank = 0;
  Scalar singular_distance = Scalar(0);
  bool singular_warning = false;
  Scalar doubling_gap = Scalar(0);
  Scalar shift_used = Scalar(0);
  int retries = 0;
  long steps_accepted = 0;
  long steps_rejected = 0;
  VectorX<Scalar> final_state;  // full state at the target, basis order
  std::vector<FaceSet> faces;
  FaceSet removed_redundant;
};

/// Rewrites the (mean, covariance) problem over a standard normal: with
/// covariance = A A^T (Cholesky), the constraint normals become A^T a_j and
/// the offsets a_j . mean + b_j.
template <typename Scalar>
HPolyhedron<Scalar> standardize(const GaussianProblem<Scalar>& gp) {
  const Eigen::Index d = gp.polyhedron.dim();
  const bool has_mean = gp.mean.size() > 0;
  const bool has_cov = gp.covariance.size() > 0;
  if (has_mean && gp.mean.size() != d)
    raise(ErrorCode::InvalidPolyhedron, "mean length does not match dimension");
  if (!has_mean && !has_cov) return gp.polyhedron;

  VectorX<Scalar> b = gp.polyhedron.b;
  if (has_mean) b += gp.polyhedron.a.transpose() * gp.mean;

  MatrixX<Scalar> a = gp.polyhedron.a;
  if (has_cov) {
    if (gp.covariance.rows() != d || gp.covariance.cols() != d)
      raise(ErrorCode::InvalidPolyhedron, "covariance shape does not match dimension");
    MatrixX<Scalar> L;
    Scalar det = Scalar(0);
    if (!detail::cholesky_with_floor(gp.covariance, &L, &det))
      raise(ErrorCode::NonPositiveDefinite, "covariance is not positive definite");
    a = L.transpose() * a;
  }
  return HPolyhedron<Scalar>(std::move(a), std::move(b));
}

template <typename Scalar>
Scalar gauss_cdf(Scalar x) {
  return std::erfc(-x / std::sqrt(Scalar(2))) / 2;
}

namespace detail {

// Visits every pair (face J, constraint k) with J + {k} also a face; these
// adjacencies drive the far-field conditional tails.
template <typename Fn>
void for_each_adjacent_pair(const SimplicialComplex& c, Fn&& fn) {
  for (int fi = 0; fi < c.size(); ++fi) {
    const FaceSet& J = c.face(fi);
    for (int k = 1; k <= c.n_ground(); ++k) {
      if (set_contains(J, k)) continue;
      if (c.contains(with_element(J, k))) fn(fi, k);
    }
  }
}

// Regression of constraint k on the face J: coefficients w = inv(alpha_J)
// alpha_{J,k} and the conditional standard deviation of xi_k given xi_J.
template <typename Scalar>
void conditional_stats(const PfaffianSystem<Scalar>& sys, int fi, int k,
                       VectorX<Scalar>* coeffs, Scalar* sigma) {
  const FaceSet& J = sys.complex.face(fi);
  const Eigen::Index s = static_cast<Eigen::Index>(J.size());
  VectorX<Scalar> cross(s);
  for (Eigen::Index q = 0; q < s; ++q)
    cross(q) = sys.gram.entry(J[static_cast<std::size_t>(q)], k);
  *coeffs = sys.gram.sub_inverse[static_cast<std::size_t>(fi)] * cross;
  const Scalar var = sys.gram.entry(k, k) - cross.dot(*coeffs);
  *sigma = std::sqrt(std::max(var, Scalar(1e-30)));
}

// Largest quadratic exponent q_J(t) = (b_J + t u_J)' inv(alpha_J) (b_J + t u_J)/2
// over the faces; components underflow once this passes ~700.
template <typename Scalar>
Scalar max_exponent(const PfaffianSystem<Scalar>& sys, const VectorX<Scalar>& b,
                    const VectorX<Scalar>& u, Scalar t) {
  Scalar worst = Scalar(0);
  for (int fi = 1; fi < sys.dimension; ++fi) {
    const FaceSet& J = sys.complex.face(fi);
    const Eigen::Index s = static_cast<Eigen::Index>(J.size());
    VectorX<Scalar> v(s);
    for (Eigen::Index q = 0; q < s; ++q)
      v(q) = b(J[static_cast<std::size_t>(q)] - 1) + t * u(J[static_cast<std::size_t>(q)] - 1);
    worst = std::max(
        worst, Scalar(0.5) * v.dot(sys.gram.sub_inverse[static_cast<std::size_t>(fi)] * v));
  }
  return worst;
}

// Direction in offset space along which every face-adjacent conditional
// margin grows: maximize m with u_k - w' u_J >= m sigma_{k|J} for all pairs.
// When no usefully positive margin exists the per-constraint norms are used
// and the doubling check judges the result.
template <typename Scalar>
VectorX<Scalar> inflation_direction(const PfaffianSystem<Scalar>& sys) {
  const Eigen::Index n = sys.polyhedron.n_constraints();
  VectorX<Scalar> norms(n);
  for (Eigen::Index j = 0; j < n; ++j) norms(j) = sys.polyhedron.a.col(j).norm();

  struct Pair {
    int fi, k;
  };
  std::vector<Pair> pairs;
  for_each_adjacent_pair(sys.complex, [&](int fi, int k) { pairs.push_back({fi, k}); });
  if (pairs.empty()) return norms;

  try {
    auto lp = LpProblem<Scalar>::with_variables(n + 1);  // u, margin m
    lp.lower.head(n) = Scalar(0.05) * norms;
    lp.upper.head(n) = norms;
    lp.lower(n) = Scalar(0);
    lp.upper(n) = Scalar(20);
    lp.objective(n) = Scalar(1);
    lp.ge_lhs.setZero(static_cast<Eigen::Index>(pairs.size()), n + 1);
    lp.ge_rhs.setZero(static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t r = 0; r < pairs.size(); ++r) {
      const FaceSet& J = sys.complex.face(pairs[r].fi);
      VectorX<Scalar> w;
      Scalar sigma;
      conditional_stats(sys, pairs[r].fi, pairs[r].k, &w, &sigma);
      lp.ge_lhs(static_cast<Eigen::Index>(r), pairs[r].k - 1) += Scalar(1);
      for (std::size_t q = 0; q < J.size(); ++q)
        lp.ge_lhs(static_cast<Eigen::Index>(r), J[q] - 1) -= w(static_cast<Eigen::Index>(q));
      lp.ge_lhs(static_cast<Eigen::Index>(r), n) = -sigma;
    }
    const auto sol = solve_lp(lp, Scalar(kLpTol));
    if (sol.status == LpStatus::Optimal && sol.objective > Scalar(0.05))
      return sol.x.head(n);
  } catch (const Error&) {
    // fall through to the norm direction
  }
  return norms;
}

// Shift making the inscribed ball radius at least 8 and every conditional
// margin at least 6.5 sigma, then pulled back while the far-field exponents
// would be unrepresentable.
template <typename Scalar>
Scalar base_shift(const PfaffianSystem<Scalar>& sys, const VectorX<Scalar>& b,
                  const VectorX<Scalar>& u) {
  const Eigen::Index n = b.size();
  Scalar t = Scalar(10);
  Scalar t_floor = Scalar(1e-3);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Scalar norm = sys.polyhedron.a.col(j).norm();
    t = std::max(t, (8 * norm - b(j)) / u(j));
    t_floor = std::max(t_floor, (6 * norm - b(j)) / u(j));
  }
  for_each_adjacent_pair(sys.complex, [&](int fi, int k) {
    const FaceSet& J = sys.complex.face(fi);
    VectorX<Scalar> w;
    Scalar sigma;
    conditional_stats(sys, fi, k, &w, &sigma);
    Scalar gamma = u(k - 1);
    Scalar c = b(k - 1);
    for (std::size_t q = 0; q < J.size(); ++q) {
      gamma -= w(static_cast<Eigen::Index>(q)) * u(J[q] - 1);
      c -= w(static_cast<Eigen::Index>(q)) * b(J[q] - 1);
    }
    const Scalar need = Scalar(6.5) * sigma;
    if (gamma > Scalar(1e-9))
      t = std::max(t, (need - c) / gamma);
    else if (gamma < Scalar(-1e-9))
      t = std::max(t, (need + c) / (-gamma));
  });
  while (max_exponent(sys, b, u, t) > Scalar(500) && t > t_floor * Scalar(1.02))
    t = std::max(t_floor, t * Scalar(0.85));
  return t;
}

}  // namespace detail

/// Radius of the largest origin-centered ball inside {f_j + t u_j >= 0}.
template <typename Scalar>
Scalar inscribed_radius(const PfaffianSystem<Scalar>& sys, const VectorX<Scalar>& b,
                        Scalar t, const VectorX<Scalar>& u) {
  Scalar r = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index j = 0; j < b.size(); ++j)
    r = std::min(r, (b(j) + t * u(j)) / sys.polyhedron.a.col(j).norm());
  return r;
}

template <typename Scalar>
Scalar inscribed_radius(const PfaffianSystem<Scalar>& sys, const VectorX<Scalar>& b,
                        Scalar t) {
  return inscribed_radius(sys, b, t, VectorX<Scalar>(VectorX<Scalar>::Ones(b.size())));
}

/// Far-field state at b + t u.  The probability component tends to one; each
/// derivative component g^J tends to the Gaussian density of the face flat,
///   N(-b_J; alpha_J) * [1 - sum_k P(xi_k <= -b_k | xi_J = -b_J)],
/// with the first-order conditional-tail corrections included so the relative
/// error is second order in the tails.  The doubling check in
/// compute_probability validates the choice of t.
template <typename Scalar>
VectorX<Scalar> initial_state(const PfaffianSystem<Scalar>& sys, const VectorX<Scalar>& b,
                              Scalar t, const VectorX<Scalar>& direction = {}) {
  const Eigen::Index n = b.size();
  VectorX<Scalar> u = direction.size() ? direction : VectorX<Scalar>::Ones(n);
  const Scalar r = inscribed_radius(sys, b, t, u);
  if (!(r >= Scalar(6)))
    raise(ErrorCode::ShiftTooSmall,
          "shift t gives inscribed radius " + std::to_string(static_cast<double>(r)) +
              " < 6");

  const Scalar two_pi = Scalar(6.283185307179586476925286766559);
  VectorX<Scalar> v = b + t * u;
  VectorX<Scalar> y(sys.dimension);

  Scalar head = Scalar(1);
  for (int k = 1; k <= n; ++k) {
    if (!sys.complex.contains({k})) continue;
    head -= gauss_cdf(-v(k - 1) / std::sqrt(sys.gram.entry(k, k)));
  }
  y(0) = head;

  for (int fi = 1; fi < sys.dimension; ++fi) {
    const FaceSet& J = sys.complex.face(fi);
    const Eigen::Index s = static_cast<Eigen::Index>(J.size());
    const MatrixX<Scalar>& inv = sys.gram.sub_inverse[static_cast<std::size_t>(fi)];
    VectorX<Scalar> vJ(s);
    for (Eigen::Index q = 0; q < s; ++q) vJ(q) = v(J[static_cast<std::size_t>(q)] - 1);
    const VectorX<Scalar> wv = inv * vJ;
    const Scalar q_expo = Scalar(0.5) * vJ.dot(wv);
    if (q_expo > Scalar(700))
      raise(ErrorCode::ShiftTooSmall, "far-field state underflows; shift too large");
    const Scalar base =
        std::pow(two_pi, -Scalar(s) / 2) *
        std::exp(-q_expo) /
        std::sqrt(sys.gram.sub_determinant[static_cast<std::size_t>(fi)]);

    Scalar corr = Scalar(1);
    for (int k = 1; k <= n; ++k) {
      if (set_contains(J, k) || !sys.complex.contains(with_element(J, k))) continue;
      VectorX<Scalar> w;
      Scalar sigma;
      detail::conditional_stats(sys, fi, k, &w, &sigma);
      Scalar mean = Scalar(0);  // conditional mean of xi_k given xi_J = -vJ
      for (Eigen::Index q = 0; q < s; ++q) mean -= w(q) * vJ(q);
      corr -= gauss_cdf((-v(k - 1) - mean) / sigma);
    }
    y(fi) = base * corr;
  }
  return y;
}

/// Integrates the state along the straight b-path from `from_b` to `to_b`
/// with a held fixed.  The direction matrix is affine in the path parameter,
/// so it is assembled once at both endpoints.
template <typename Scalar>
VectorX<Scalar> integrate(const PfaffianSystem<Scalar>& sys, const VectorX<Scalar>& from_b,
                          const VectorX<Scalar>& to_b, const VectorX<Scalar>& y0,
                          const HgmConfig& cfg = {}, OdeStats* stats = nullptr) {
  const VectorX<Scalar> delta = to_b - from_b;
  if (delta.cwiseAbs().maxCoeff() == Scalar(0)) return y0;

  const int n = static_cast<int>(sys.polyhedron.n_constraints());
  const int m = sys.dimension;
  MatrixX<Scalar> K0 = MatrixX<Scalar>::Zero(m, m);
  MatrixX<Scalar> K1 = MatrixX<Scalar>::Zero(m, m);
  for (int j = 1; j <= n; ++j) {
    if (delta(j - 1) == Scalar(0)) continue;
    K0 += delta(j - 1) * b_direction_matrix(sys, j, from_b);
    K1 += delta(j - 1) * b_direction_matrix(sys, j, to_b);
  }
  K1 -= K0;

  auto rhs = [&](Scalar s, const VectorX<Scalar>& y) -> VectorX<Scalar> {
    return K0 * y + s * (K1 * y);
  };
  return integrate_rk45<Scalar>(rhs, Scalar(0), Scalar(1), y0, Scalar(cfg.rel_tol),
                                Scalar(cfg.abs_tol), stats);
}

/// Analytic continuation along a straight path in a with b and the complex
/// held fixed.  The whole segment must stay clear of the singular locus
/// (checked by sampling det alpha_J at 64 points).
template <typename Scalar>
VectorX<Scalar> continue_in_a(const SimplicialComplex& complex, const MatrixX<Scalar>& from_a,
                              const MatrixX<Scalar>& to_a, const VectorX<Scalar>& b,
                              const VectorX<Scalar>& y0, const HgmConfig& cfg = {},
                              OdeStats* stats = nullptr) {
  const MatrixX<Scalar> delta = to_a - from_a;
  if (delta.cwiseAbs().maxCoeff() == Scalar(0)) return y0;

  for (int i = 0; i < 64; ++i) {
    const Scalar s = Scalar(i) / Scalar(63);
    const MatrixX<Scalar> a = from_a + s * delta;
    try {
      const auto cache = gram_cache(HPolyhedron<Scalar>(a, b), complex);
      for (std::size_t fi = 1; fi < cache.sub_determinant.size(); ++fi) {
        if (cache.sub_determinant[fi] <= Scalar(1e-8))
          raise(ErrorCode::SingularLocusCrossing,
                "det alpha_J drops to " + std::to_string(static_cast<double>(
                                              cache.sub_determinant[fi])) +
                    " along the a-path");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SingularGram)
        raise(ErrorCode::SingularLocusCrossing, "a-path crosses the singular locus");
      throw;
    }
  }

  const int n = static_cast<int>(b.size());
  auto rhs = [&](Scalar s, const VectorX<Scalar>& y) -> VectorX<Scalar> {
    const MatrixX<Scalar> a = from_a + s * delta;
    const auto sys = build_system(HPolyhedron<Scalar>(a, b), complex);
    // Direction matrix sum_{ij} delta_{ij} C_{a_ij}, grouped through
    // W(j,k) = sum_i delta_{ij} a_{ik}(s) to avoid the per-entry loop.
    const MatrixX<Scalar> W = delta.transpose() * a;
    std::vector<MatrixX<Scalar>> B(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k)
      B[static_cast<std::size_t>(k - 1)] = b_direction_matrix(sys, k, b);
    MatrixX<Scalar> M = MatrixX<Scalar>::Zero(sys.dimension, sys.dimension);
    for (int j = 1; j <= n; ++j) {
      MatrixX<Scalar> right = MatrixX<Scalar>::Zero(sys.dimension, sys.dimension);
      for (int k = 1; k <= n; ++k) {
        const Scalar w = W(j - 1, k - 1);
        if (w == Scalar(0)) continue;
        right += w * B[static_cast<std::size_t>(k - 1)];
        M += w * b_direction_derivative(sys, j, k);
      }
      M += B[static_cast<std::size_t>(j - 1)] * right;
    }
    return M * y;
  };
  return integrate_rk45<Scalar>(rhs, Scalar(0), Scalar(1), y0, Scalar(cfg.rel_tol),
                                Scalar(cfg.abs_tol), stats);
}

template <typename Scalar>
struct ProbabilityResult {
  Scalar probability = Scalar(0);
  HgmDiagnostics<Scalar> diagnostics;
};

/// Full pipeline: standardize, strip redundant constraints, verify general
/// position, build the nerve and the Pfaffian system, then integrate from the
/// far field.  Runs with shifts t and 2t and accepts once the two results
/// agree to init_tol, doubling t otherwise (max_retries times).
template <typename Scalar>
ProbabilityResult<Scalar> compute_probability(const GaussianProblem<Scalar>& gp,
                                              const HgmConfig& cfg = {}) {
  const HPolyhedron<Scalar> std_poly = standardize(gp);
  auto strip = strip_redundant(std_poly);
  const HPolyhedron<Scalar>& p = strip.polyhedron;

  const auto gpr = check_general_position(homogenize(p));
  const SimplicialComplex complex = nerve(p, gpr);
  const auto sys = build_system(p, complex);
  const auto sd = singular_distance(sys);

  const VectorX<Scalar>& b = p.b;
  const VectorX<Scalar> u = detail::inflation_direction(sys);
  Scalar t = cfg.shift_t ? Scalar(*cfg.shift_t) : detail::base_shift(sys, b, u);

  ProbabilityResult<Scalar> out;
  auto& diag = out.diagnostics;
  diag.rank = sys.dimension;
  diag.singular_distance = sd.value;
  diag.singular_warning = sd.warning;
  diag.faces = complex.faces();
  diag.removed_redundant = strip.removed;

  OdeStats stats;
  // Components at the far field span hundreds of orders of magnitude and can
  // only grow from their seeded values, so error control must be relative to
  // the smallest seed rather than a fixed absolute floor.
  auto run_once = [&](Scalar shift) {
    const VectorX<Scalar> y0 = initial_state(sys, b, shift, u);
    Scalar min_mag = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index i = 0; i < y0.size(); ++i)
      if (y0(i) != Scalar(0)) min_mag = std::min(min_mag, std::abs(y0(i)));
    HgmConfig rc = cfg;
    rc.abs_tol = std::min(Scalar(cfg.abs_tol),
                          std::max(min_mag * Scalar(cfg.rel_tol) * Scalar(1e-2),
                                   Scalar(1e-280)));
    const VectorX<Scalar> start = b + shift * u;
    return integrate(sys, start, b, y0, rc, &stats);
  };
  // Validate against the doubled shift; when doubling would underflow the
  // far-field exponents, fall back to the largest representable factor.
  auto validation_factor = [&](Scalar shift) {
    if (detail::max_exponent(sys, b, u, 2 * shift) <= Scalar(650)) return Scalar(2);
    const Scalar q = std::max(detail::max_exponent(sys, b, u, shift), Scalar(1));
    return std::clamp(std::sqrt(Scalar(600) / q), Scalar(1.15), Scalar(2));
  };

  VectorX<Scalar> prev = run_once(t);
  for (int attempt = 0;; ++attempt) {
    const Scalar factor = validation_factor(t);
    const Scalar t2 = factor * t;
    const VectorX<Scalar> cur = run_once(t2);
    const Scalar gap = std::abs(cur(0) - prev(0));
    if (gap <= Scalar(cfg.init_tol)) {
      diag.doubling_gap = gap;
      diag.shift_used = t2;
      diag.retries = attempt;
      diag.steps_accepted = stats.accepted;
      diag.steps_rejected = stats.rejected;
      diag.final_state = cur;
      out.probability = cur(0);
      if (out.probability < Scalar(-1e-6) || out.probability > Scalar(1) + Scalar(1e-6))
        raise(ErrorCode::NonFiniteState,
              "computed probability " + std::to_string(static_cast<double>(out.probability)) +
                  " is outside [0, 1]");
      return out;
    }
    if (attempt >= cfg.max_retries)
      raise(ErrorCode::ShiftTooSmall,
            "doubling gap " + std::to_string(static_cast<double>(gap)) +
                " above init_tol after " + std::to_string(attempt + 1) + " attempts");
    prev = cur;
    t = t2;
  }
}

}  // namespace polygauss
