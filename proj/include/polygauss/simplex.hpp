#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "polygauss/error.hpp"
#include "polygauss/types.hpp"

namespace polygauss {

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <typename Scalar>
struct LpProblem {
  // maximize objective . x
  VectorX<Scalar> objective;
  MatrixX<Scalar> eq_lhs;  // eq_lhs x = eq_rhs
  VectorX<Scalar> eq_rhs;
  MatrixX<Scalar> ge_lhs;  // ge_lhs x >= ge_rhs
  VectorX<Scalar> ge_rhs;
  VectorX<Scalar> lower;  // elementwise bounds, +-infinity allowed
  VectorX<Scalar> upper;

  static LpProblem with_variables(Eigen::Index nvars) {
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    LpProblem lp;
    lp.objective = VectorX<Scalar>::Zero(nvars);
    lp.eq_lhs.resize(0, nvars);
    lp.eq_rhs.resize(0);
    lp.ge_lhs.resize(0, nvars);
    lp.ge_rhs.resize(0);
    lp.lower = VectorX<Scalar>::Constant(nvars, -inf);
    lp.upper = VectorX<Scalar>::Constant(nvars, inf);
    return lp;
  }
};

template <typename Scalar>
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Scalar objective = Scalar(0);
  VectorX<Scalar> x;
};

namespace detail {

// Dense tableau simplex in standard form: min cost . z, rows z = rhs, z >= 0,
// rhs >= 0.  Entering and leaving variables follow Bland's rule, so the
// iteration cannot cycle; an iteration cap guards against numerical stall.
template <typename Scalar>
class Tableau {
 public:
  Tableau(MatrixX<Scalar> rows, VectorX<Scalar> rhs, Scalar eps)
      : t_(rows.rows(), rows.cols() + 1), basis_(rows.rows()), eps_(eps) {
    t_.leftCols(rows.cols()) = rows;
    t_.col(rows.cols()) = rhs;
    n_ = rows.cols();
  }

  Eigen::Index n_rows() const { return t_.rows(); }
  Eigen::Index n_cols() const { return n_; }
  Scalar rhs(Eigen::Index i) const { return t_(i, n_); }
  int basis(Eigen::Index i) const { return basis_[i]; }
  void set_basis(Eigen::Index i, int var) { basis_[i] = var; }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == row) continue;
      const Scalar f = t_(i, col);
      if (f != Scalar(0)) t_.row(i) -= f * t_.row(row);
    }
    basis_[row] = static_cast<int>(col);
  }

  // Minimizes cost . z from the current basic feasible point.  Reduced costs
  // are recomputed from the basis every iteration; problems here are small
  // enough that freshness beats incremental updates.
  LpStatus run(const VectorX<Scalar>& cost, const std::vector<bool>& allowed) {
    const long max_iters = 200000;
    VectorX<Scalar> reduced(n_);
    for (long iter = 0; iter < max_iters; ++iter) {
      reduced = cost;
      for (Eigen::Index i = 0; i < t_.rows(); ++i) {
        const Scalar cb = cost(basis_[i]);
        if (cb != Scalar(0)) reduced -= cb * t_.row(i).head(n_).transpose();
      }

      // Bland: smallest-index candidate with negative reduced cost
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (allowed[j] && reduced(j) < -eps_) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::Optimal;

      Eigen::Index leave = -1;
      Scalar best_ratio = Scalar(0);
      for (Eigen::Index i = 0; i < t_.rows(); ++i) {
        const Scalar aij = t_(i, enter);
        if (aij > eps_) {
          const Scalar ratio = rhs(i) / aij;
          if (leave < 0 || ratio < best_ratio - eps_ ||
              (ratio < best_ratio + eps_ && basis_[i] < basis_[leave])) {
            leave = i;
            best_ratio = ratio;
          }
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
    }
    raise(ErrorCode::LpNumericalFailure, "simplex iteration limit reached");
  }

  VectorX<Scalar> basic_solution() const {
    VectorX<Scalar> z = VectorX<Scalar>::Zero(n_);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) z(basis_[i]) = rhs(i);
    return z;
  }

  MatrixX<Scalar>& data() { return t_; }

 private:
  MatrixX<Scalar> t_;
  std::vector<int> basis_;
  Eigen::Index n_;
  Scalar eps_;
};

}  // namespace detail

/// Dense two-phase primal simplex with Bland's anti-cycling rule.
/// Returns Optimal/Infeasible/Unbounded; throws LpNumericalFailure when the
/// iteration stalls or the reported optimum violates feasibility.
template <typename Scalar>
LpSolution<Scalar> solve_lp(const LpProblem<Scalar>& lp, Scalar eps = Scalar(1e-9)) {
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  const Eigen::Index nv = lp.objective.size();
  const Eigen::Index n_eq = lp.eq_rhs.size();
  const Eigen::Index n_ge = lp.ge_rhs.size();

  // Substitutions mapping original variables to nonnegative standard ones:
  //   lower finite:          x = lower + u
  //   upper finite only:     x = upper - u
  //   both infinite:         x = u - v
  // A finite upper bound together with a finite lower bound adds the row
  // u + s = upper - lower.
  struct Subst {
    Eigen::Index pos_col;   // column of u
    Eigen::Index neg_col;   // column of v when two-sided free, else -1
    Scalar shift;           // additive constant
    Scalar sign;            // +1 or -1 applied to u
  };
  std::vector<Subst> subst(nv);
  Eigen::Index n_struct = 0;
  Eigen::Index n_ub_rows = 0;
  for (Eigen::Index i = 0; i < nv; ++i) {
    const bool lo = lp.lower(i) > -inf;
    const bool hi = lp.upper(i) < inf;
    if (lo) {
      subst[i] = {n_struct++, -1, lp.lower(i), Scalar(1)};
      if (hi) ++n_ub_rows;
    } else if (hi) {
      subst[i] = {n_struct++, -1, lp.upper(i), Scalar(-1)};
    } else {
      subst[i] = {n_struct, n_struct + 1, Scalar(0), Scalar(1)};
      n_struct += 2;
    }
  }

  const Eigen::Index n_rows = n_eq + n_ge + n_ub_rows;
  const Eigen::Index n_slack = n_ge + n_ub_rows;
  const Eigen::Index n_total = n_struct + n_slack + n_rows;  // + artificials

  MatrixX<Scalar> rows = MatrixX<Scalar>::Zero(n_rows, n_total);
  VectorX<Scalar> rhs = VectorX<Scalar>::Zero(n_rows);

  auto emit_row = [&](Eigen::Index r, const auto& coeffs, Scalar b) {
    Scalar adj = b;
    for (Eigen::Index i = 0; i < nv; ++i) {
      const Scalar c = coeffs(i);
      if (c == Scalar(0)) continue;
      adj -= c * subst[i].shift;
      rows(r, subst[i].pos_col) += c * subst[i].sign;
      if (subst[i].neg_col >= 0) rows(r, subst[i].neg_col) -= c;
    }
    rhs(r) = adj;
  };

  Eigen::Index r = 0;
  for (Eigen::Index k = 0; k < n_eq; ++k, ++r) emit_row(r, lp.eq_lhs.row(k), lp.eq_rhs(k));
  for (Eigen::Index k = 0; k < n_ge; ++k, ++r) {
    emit_row(r, lp.ge_lhs.row(k), lp.ge_rhs(k));
    rows(r, n_struct + k) = Scalar(-1);  // surplus
  }
  Eigen::Index ub_slot = 0;
  for (Eigen::Index i = 0; i < nv; ++i) {
    if (lp.lower(i) > -inf && lp.upper(i) < inf) {
      rows(r, subst[i].pos_col) = Scalar(1);
      rows(r, n_struct + n_ge + ub_slot) = Scalar(1);
      rhs(r) = lp.upper(i) - lp.lower(i);
      ++ub_slot;
      ++r;
    }
  }

  for (Eigen::Index i = 0; i < n_rows; ++i) {
    if (rhs(i) < Scalar(0)) {
      rows.row(i) = -rows.row(i);
      rhs(i) = -rhs(i);
    }
    rows(i, n_struct + n_slack + i) = Scalar(1);  // artificial
  }

  detail::Tableau<Scalar> tab(std::move(rows), rhs, eps);
  for (Eigen::Index i = 0; i < n_rows; ++i)
    tab.set_basis(i, static_cast<int>(n_struct + n_slack + i));

  std::vector<bool> allowed(n_total, true);
  VectorX<Scalar> phase1 = VectorX<Scalar>::Zero(n_total);
  phase1.tail(n_rows).setOnes();
  if (tab.run(phase1, allowed) != LpStatus::Optimal)
    raise(ErrorCode::LpNumericalFailure, "phase 1 did not terminate at an optimum");

  Scalar art_sum = Scalar(0);
  for (Eigen::Index i = 0; i < n_rows; ++i)
    if (tab.basis(i) >= n_struct + n_slack) art_sum += tab.rhs(i);
  if (art_sum > Scalar(100) * eps) return {LpStatus::Infeasible, Scalar(0), {}};

  // Drive leftover artificials out of the basis; rows that admit no pivot are
  // dependent and harmless (the artificial stays basic at value zero).
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    if (tab.basis(i) < n_struct + n_slack) continue;
    for (Eigen::Index j = 0; j < n_struct + n_slack; ++j) {
      if (std::abs(tab.data()(i, j)) > Scalar(100) * eps) {
        tab.pivot(i, j);
        break;
      }
    }
  }
  for (Eigen::Index j = n_struct + n_slack; j < n_total; ++j) allowed[j] = false;

  VectorX<Scalar> phase2 = VectorX<Scalar>::Zero(n_total);
  for (Eigen::Index i = 0; i < nv; ++i) {
    const Scalar c = -lp.objective(i);  // maximize -> minimize
    phase2(subst[i].pos_col) += c * subst[i].sign;
    if (subst[i].neg_col >= 0) phase2(subst[i].neg_col) -= c;
  }
  const LpStatus status = tab.run(phase2, allowed);
  if (status == LpStatus::Unbounded) return {LpStatus::Unbounded, Scalar(0), {}};

  const VectorX<Scalar> z = tab.basic_solution();
  LpSolution<Scalar> sol;
  sol.status = LpStatus::Optimal;
  sol.x.resize(nv);
  for (Eigen::Index i = 0; i < nv; ++i) {
    Scalar v = subst[i].shift + subst[i].sign * z(subst[i].pos_col);
    if (subst[i].neg_col >= 0) v -= z(subst[i].neg_col);
    sol.x(i) = v;
  }
  sol.objective = lp.objective.dot(sol.x);

  // feasibility audit of the reported optimum
  const Scalar feas_tol = Scalar(1e-7);
  Scalar scale = Scalar(1);
  if (n_eq > 0) scale = std::max(scale, lp.eq_lhs.cwiseAbs().maxCoeff());
  if (n_ge > 0) scale = std::max(scale, lp.ge_lhs.cwiseAbs().maxCoeff());
  if (n_eq > 0 &&
      (lp.eq_lhs * sol.x - lp.eq_rhs).cwiseAbs().maxCoeff() > feas_tol * scale)
    raise(ErrorCode::LpNumericalFailure, "simplex lost equality feasibility");
  if (n_ge > 0 &&
      (lp.ge_lhs * sol.x - lp.ge_rhs).minCoeff() < -feas_tol * scale)
    raise(ErrorCode::LpNumericalFailure, "simplex lost inequality feasibility");
  for (Eigen::Index i = 0; i < nv; ++i) {
    if (sol.x(i) < lp.lower(i) - feas_tol || sol.x(i) > lp.upper(i) + feas_tol)
      raise(ErrorCode::LpNumericalFailure, "simplex lost bound feasibility");
  }
  return sol;
}

}  // namespace polygauss
