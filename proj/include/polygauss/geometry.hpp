#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <vector>

#include "polygauss/face_set.hpp"
#include "polygauss/simplex.hpp"
#include "polygauss/types.hpp"

namespace polygauss {

inline constexpr double kLpTol = 1e-9;      // feasibility / strictness tolerance
inline constexpr double kStrictTol = 1e-7;  // margin realizing strict inequalities
inline constexpr double kRankTol = 1e-9;    // QR pivot threshold, relative to largest

enum class ConeClass { FullDimCone, ZeroCone, Violation };

inline const char* cone_class_name(ConeClass c) noexcept {
  switch (c) {
    case ConeClass::FullDimCone: return "FullDimCone";
    case ConeClass::ZeroCone: return "ZeroCone";
    case ConeClass::Violation: return "Violation";
  }
  return "?";
}

struct GeneralPositionReport {
  bool in_general_position = false;
  std::optional<FaceSet> witness;  // first violating J in card-lex order
  std::map<FaceSet, ConeClass, CardLexLess> face_dims;
  std::vector<FaceSet> near_ties;  // decisions within 10x of their threshold
};

template <typename Scalar>
struct ValidityCertificate {
  enum class Kind { ValidCaseI, ValidCaseII, Invalid };
  Kind kind = Kind::Invalid;
  VectorX<Scalar> multipliers;  // length n for the valid cases

  bool valid() const { return kind != Kind::Invalid; }
};

namespace detail {

// Rank of the selected homogenized columns, via column-pivoted QR.
template <typename Scalar>
Eigen::Index column_rank(const HomogenizedFamily<Scalar>& h, const FaceSet& J,
                         bool* near_tie = nullptr) {
  if (J.empty()) return 0;
  MatrixX<Scalar> m(h.columns.rows(), static_cast<Eigen::Index>(J.size()));
  for (std::size_t k = 0; k < J.size(); ++k) m.col(k) = h.column(J[k]);
  Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(m);
  qr.setThreshold(Scalar(kRankTol));
  if (near_tie) {
    const Scalar max_piv = qr.matrixR().diagonal().cwiseAbs().maxCoeff();
    *near_tie = false;
    if (max_piv > Scalar(0)) {
      for (Eigen::Index i = 0; i < qr.matrixR().diagonal().size(); ++i) {
        const Scalar r = std::abs(qr.matrixR()(i, i)) / max_piv;
        if (r > Scalar(kRankTol) / 10 && r < Scalar(kRankTol) * 10) *near_tie = true;
      }
    }
  }
  return qr.rank();
}

// Max-min-slack LP behind relative_interior_point; returns the optimum and
// the maximizing point.
template <typename Scalar>
std::pair<Scalar, VectorX<Scalar>> max_min_slack(const HomogenizedFamily<Scalar>& h,
                                                 const FaceSet& J) {
  const Eigen::Index dim = h.columns.rows();
  const int n1 = static_cast<int>(h.n_halfspaces());
  const Eigen::Index n_out = n1 - static_cast<Eigen::Index>(J.size());

  auto lp = LpProblem<Scalar>::with_variables(dim + 1);  // x in [-1,1]^dim, delta
  lp.lower.head(dim).setConstant(Scalar(-1));
  lp.upper.head(dim).setConstant(Scalar(1));
  lp.lower(dim) = Scalar(0);
  lp.objective(dim) = Scalar(1);

  lp.eq_lhs.setZero(static_cast<Eigen::Index>(J.size()), dim + 1);
  lp.eq_rhs.setZero(static_cast<Eigen::Index>(J.size()));
  for (std::size_t k = 0; k < J.size(); ++k)
    lp.eq_lhs.row(static_cast<Eigen::Index>(k)).head(dim) = h.column(J[k]).transpose();

  lp.ge_lhs.setZero(n_out, dim + 1);
  lp.ge_rhs.setZero(n_out);
  Eigen::Index r = 0;
  for (int k = 0; k < n1; ++k) {
    if (set_contains(J, k)) continue;
    lp.ge_lhs.row(r).head(dim) = h.column(k).transpose();
    lp.ge_lhs(r, dim) = Scalar(-1);
    ++r;
  }

  const auto sol = solve_lp(lp, Scalar(kLpTol));
  if (sol.status != LpStatus::Optimal)
    raise(ErrorCode::LpNumericalFailure, "slack LP had no optimum");
  return {sol.objective, sol.x.head(dim)};
}

// Largest coordinate magnitude attainable in the cone
// {x : column_j . x = 0 (j in J), column_k . x >= 0 (k not in J)} with
// |x|_inf <= 1.  Cones are scale invariant, so the value is 1 when a nonzero
// point exists and 0 otherwise.
template <typename Scalar>
Scalar max_cone_coordinate(const HomogenizedFamily<Scalar>& h, const FaceSet& J) {
  const Eigen::Index dim = h.columns.rows();
  const int n1 = static_cast<int>(h.n_halfspaces());
  Scalar best = Scalar(0);
  for (Eigen::Index coord = 0; coord < dim; ++coord) {
    for (int sign = 0; sign < 2; ++sign) {
      auto lp = LpProblem<Scalar>::with_variables(dim);
      lp.lower.setConstant(Scalar(-1));
      lp.upper.setConstant(Scalar(1));
      lp.objective(coord) = sign ? Scalar(-1) : Scalar(1);

      lp.eq_lhs.setZero(static_cast<Eigen::Index>(J.size()), dim);
      lp.eq_rhs.setZero(static_cast<Eigen::Index>(J.size()));
      for (std::size_t k = 0; k < J.size(); ++k)
        lp.eq_lhs.row(static_cast<Eigen::Index>(k)) = h.column(J[k]).transpose();

      const Eigen::Index n_out = n1 - static_cast<Eigen::Index>(J.size());
      lp.ge_lhs.setZero(n_out, dim);
      lp.ge_rhs.setZero(n_out);
      Eigen::Index r = 0;
      for (int k = 0; k < n1; ++k) {
        if (set_contains(J, k)) continue;
        lp.ge_lhs.row(r++) = h.column(k).transpose();
      }

      const auto sol = solve_lp(lp, Scalar(kLpTol));
      if (sol.status != LpStatus::Optimal)
        raise(ErrorCode::LpNumericalFailure, "cone coordinate LP had no optimum");
      best = std::max(best, sol.objective);
      if (best > Scalar(0.5)) return best;
    }
  }
  return best;
}

}  // namespace detail

/// Nonzero x with column_j . x = 0 for j in J and column_k . x > 0 strictly for
/// k outside J, found by maximizing the minimum slack under |x|_inf <= 1.
/// Returns nullopt when the optimum does not clear the strictness tolerance.
template <typename Scalar>
std::optional<VectorX<Scalar>> relative_interior_point(const HomogenizedFamily<Scalar>& h,
                                                       const FaceSet& J,
                                                       Scalar* slack_out = nullptr) {
  if (static_cast<Eigen::Index>(J.size()) == h.n_halfspaces()) {
    // No strict conditions remain; any nonzero kernel vector qualifies.
    Eigen::FullPivLU<MatrixX<Scalar>> lu(h.columns.transpose());
    lu.setThreshold(Scalar(kRankTol));
    if (slack_out) *slack_out = Scalar(0);
    if (lu.dimensionOfKernel() == 0) return std::nullopt;
    VectorX<Scalar> v = lu.kernel().col(0);
    v /= v.cwiseAbs().maxCoeff();
    return v;
  }
  auto [slack, x] = detail::max_min_slack(h, J);
  if (slack_out) *slack_out = slack;
  if (slack <= Scalar(kStrictTol)) return std::nullopt;
  return x;
}

/// Classifies every subset J of {0,...,n} as FullDimCone, ZeroCone, or a
/// general-position violation.  Enumeration goes by increasing cardinality,
/// lexicographic within a cardinality; supersets of a ZeroCone are pruned and
/// not recorded (the cone stays {0} by downward closure).
template <typename Scalar>
GeneralPositionReport check_general_position(const HomogenizedFamily<Scalar>& h) {
  const int n1 = static_cast<int>(h.n_halfspaces());
  GeneralPositionReport report;
  std::vector<FaceSet> zero_sets;

  std::vector<int> comb;
  auto classify = [&](const FaceSet& J) {
    Scalar slack = Scalar(0);
    bool rank_tie = false;
    const auto rip = relative_interior_point(h, J, &slack);
    const bool independent =
        detail::column_rank(h, J, &rank_tie) == static_cast<Eigen::Index>(J.size());
    if (rank_tie) report.near_ties.push_back(J);
    if (slack > Scalar(kStrictTol) / 10 && slack < Scalar(kStrictTol) * 10)
      report.near_ties.push_back(J);

    if (rip.has_value() && independent) {
      report.face_dims.emplace(J, ConeClass::FullDimCone);
      return;
    }
    const Scalar reach = detail::max_cone_coordinate(h, J);
    if (reach <= Scalar(0.5)) {
      if (reach > Scalar(10) * Scalar(kLpTol)) report.near_ties.push_back(J);
      report.face_dims.emplace(J, ConeClass::ZeroCone);
      zero_sets.push_back(J);
      return;
    }
    report.face_dims.emplace(J, ConeClass::Violation);
    if (!report.witness) report.witness = J;
  };

  for (int card = 0; card <= n1; ++card) {
    comb.assign(card, 0);
    for (int i = 0; i < card; ++i) comb[i] = i;
    while (true) {
      FaceSet J(comb.begin(), comb.end());
      bool pruned = false;
      for (const auto& z : zero_sets) {
        if (is_subset(z, J)) {
          pruned = true;
          break;
        }
      }
      if (!pruned) classify(J);

      // next combination of {0..n1-1} of size card
      int i = card - 1;
      while (i >= 0 && comb[i] == n1 - card + i) --i;
      if (i < 0) break;
      ++comb[i];
      for (int k = i + 1; k < card; ++k) comb[k] = comb[k - 1] + 1;
    }
  }
  report.in_general_position = !report.witness.has_value();
  return report;
}

/// Farkas test: decides whether c . x + c0 >= 0 holds on P(a, b) and returns
/// the multiplier certificate.  Kind ValidCaseII signals P = empty.
template <typename Scalar>
ValidityCertificate<Scalar> is_valid(const HPolyhedron<Scalar>& p,
                                     const VectorX<Scalar>& c, Scalar c0) {
  const Eigen::Index n = p.n_constraints();

  // Case II first: lambda >= 0 with a lambda = 0 and b . lambda < 0.
  {
    auto lp = LpProblem<Scalar>::with_variables(n);
    lp.lower.setZero();
    lp.upper.setOnes();
    lp.objective = -p.b;
    lp.eq_lhs = p.a;
    lp.eq_rhs = VectorX<Scalar>::Zero(p.dim());
    const auto sol = solve_lp(lp, Scalar(kLpTol));
    if (sol.status == LpStatus::Optimal && sol.objective > Scalar(kLpTol)) {
      ValidityCertificate<Scalar> cert;
      cert.kind = ValidityCertificate<Scalar>::Kind::ValidCaseII;
      cert.multipliers = sol.x;
      return cert;
    }
  }

  // Case I: lambda >= 0 with a lambda = c, minimizing b . lambda.
  auto lp = LpProblem<Scalar>::with_variables(n);
  lp.lower.setZero();
  lp.objective = -p.b;
  lp.eq_lhs = p.a;
  lp.eq_rhs = c;
  const auto sol = solve_lp(lp, Scalar(kLpTol));
  ValidityCertificate<Scalar> cert;
  if (sol.status == LpStatus::Infeasible) return cert;
  if (sol.status == LpStatus::Unbounded)
    raise(ErrorCode::LpNumericalFailure,
          "unbounded multiplier search after empty-certificate check");
  if (-sol.objective <= c0 + Scalar(kLpTol)) {
    cert.kind = ValidityCertificate<Scalar>::Kind::ValidCaseI;
    cert.multipliers = sol.x;
  }
  return cert;
}

template <typename Scalar>
struct StripResult {
  HPolyhedron<Scalar> polyhedron;
  FaceSet removed;  // 1-based indices into the input
};

namespace detail {

// max t with a_j . x + b_j >= t for all kept j and t <= 1; P is empty exactly
// when the optimum is negative.
template <typename Scalar>
Scalar max_joint_slack(const HPolyhedron<Scalar>& p, const std::vector<int>& keep,
                       int skip = -1) {
  const Eigen::Index d = p.dim();
  Eigen::Index rows = 0;
  for (int j : keep)
    if (j != skip) ++rows;
  auto lp = LpProblem<Scalar>::with_variables(d + 1);
  lp.upper(d) = Scalar(1);
  lp.objective(d) = Scalar(1);
  lp.ge_lhs.setZero(rows, d + 1);
  lp.ge_rhs.setZero(rows);
  Eigen::Index r = 0;
  for (int j : keep) {
    if (j == skip) continue;
    lp.ge_lhs.row(r).head(d) = p.normal(j).transpose();
    lp.ge_lhs(r, d) = Scalar(-1);
    lp.ge_rhs(r) = -p.offset(j);
    ++r;
  }
  const auto sol = solve_lp(lp, Scalar(kLpTol));
  if (sol.status != LpStatus::Optimal)
    raise(ErrorCode::LpNumericalFailure, "joint slack LP had no optimum");
  return sol.objective;
}

}  // namespace detail

/// Removes every constraint implied by the remaining ones (standard LP
/// redundancy test, applied sequentially so duplicated constraints keep one
/// copy).  The result's constraints are exactly the bounding half-spaces.
template <typename Scalar>
StripResult<Scalar> strip_redundant(const HPolyhedron<Scalar>& p) {
  const Eigen::Index d = p.dim();
  const int n = static_cast<int>(p.n_constraints());

  std::vector<int> active(n);
  for (int j = 0; j < n; ++j) active[j] = j + 1;
  if (detail::max_joint_slack(p, active) < -Scalar(kLpTol))
    raise(ErrorCode::EmptyPolyhedron, "polyhedron has no feasible point");

  StripResult<Scalar> out;
  for (int j = 1; j <= n; ++j) {
    if (active.size() == 1) break;
    // min f_j over the polyhedron cut out by the other active constraints
    auto lp = LpProblem<Scalar>::with_variables(d);
    lp.objective = -p.normal(j);
    Eigen::Index rows = static_cast<Eigen::Index>(active.size()) - 1;
    lp.ge_lhs.setZero(rows, d);
    lp.ge_rhs.setZero(rows);
    Eigen::Index r = 0;
    for (int k : active) {
      if (k == j) continue;
      lp.ge_lhs.row(r) = p.normal(k).transpose();
      lp.ge_rhs(r) = -p.offset(k);
      ++r;
    }
    const auto sol = solve_lp(lp, Scalar(kLpTol));
    if (sol.status == LpStatus::Unbounded) continue;  // f_j dips to -inf: facet
    if (sol.status != LpStatus::Optimal)
      raise(ErrorCode::LpNumericalFailure, "redundancy LP had no optimum");
    const Scalar min_fj = -sol.objective + p.offset(j);
    if (min_fj >= -Scalar(kLpTol)) {
      active.erase(std::find(active.begin(), active.end(), j));
      out.removed.push_back(j);
    }
  }

  MatrixX<Scalar> a(d, static_cast<Eigen::Index>(active.size()));
  VectorX<Scalar> b(static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    a.col(static_cast<Eigen::Index>(k)) = p.normal(active[k]);
    b(static_cast<Eigen::Index>(k)) = p.offset(active[k]);
  }
  out.polyhedron = HPolyhedron<Scalar>(std::move(a), std::move(b));
  return out;
}

}  // namespace polygauss
