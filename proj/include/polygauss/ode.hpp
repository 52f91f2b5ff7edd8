#pragma once

#include <algorithm>
#include <cmath>

#include "polygauss/error.hpp"
#include "polygauss/types.hpp"

namespace polygauss {

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

/// Embedded Dormand-Prince 4(5) pair with PI step control.  `rhs(s, y)` must
/// return the derivative vector.  Throws StepUnderflow when the controller
/// drives the step below 1e-14 and NonFiniteState on overflow.
template <typename Scalar, typename Rhs>
VectorX<Scalar> integrate_rk45(Rhs&& rhs, Scalar s0, Scalar s1, VectorX<Scalar> y,
                               Scalar rel_tol, Scalar abs_tol, OdeStats* stats = nullptr) {
  if (s0 == s1) return y;

  // clang-format off
  constexpr double c2 = 1.0/5, c3 = 3.0/10, c4 = 4.0/5, c5 = 8.0/9;
  constexpr double a21 = 1.0/5;
  constexpr double a31 = 3.0/40,       a32 = 9.0/40;
  constexpr double a41 = 44.0/45,      a42 = -56.0/15,      a43 = 32.0/9;
  constexpr double a51 = 19372.0/6561, a52 = -25360.0/2187, a53 = 64448.0/6561, a54 = -212.0/729;
  constexpr double a61 = 9017.0/3168,  a62 = -355.0/33,     a63 = 46732.0/5247, a64 = 49.0/176,    a65 = -5103.0/18656;
  constexpr double b1  = 35.0/384,     b3  = 500.0/1113,    b4  = 125.0/192,    b5  = -2187.0/6784, b6 = 11.0/84;
  constexpr double e1  = 71.0/57600,   e3  = -71.0/16695,   e4  = 71.0/1920,    e5  = -17253.0/339200,
                   e6  = 22.0/525,     e7  = -1.0/40;
  // clang-format on

  OdeStats local;
  OdeStats& st = stats ? *stats : local;
  const Scalar span = s1 - s0;
  const Scalar dir = span > Scalar(0) ? Scalar(1) : Scalar(-1);
  const Scalar h_min = Scalar(1e-14) * std::max(Scalar(1), std::abs(span));
  Scalar h = dir * std::min(std::abs(span), std::abs(span) / Scalar(100) + Scalar(1e-4));
  Scalar s = s0;
  Scalar err_prev = Scalar(1);
  const long max_steps = 4000000;

  VectorX<Scalar> k1 = rhs(s, y);
  ++st.rhs_evals;

  for (long step = 0; step < max_steps; ++step) {
    if (dir * (s + h - s1) > Scalar(0)) h = s1 - s;

    const VectorX<Scalar> k2 = rhs(s + c2 * h, y + h * (a21 * k1));
    const VectorX<Scalar> k3 = rhs(s + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const VectorX<Scalar> k4 = rhs(s + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const VectorX<Scalar> k5 =
        rhs(s + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const VectorX<Scalar> k6 =
        rhs(s + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const VectorX<Scalar> y1 =
        y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const VectorX<Scalar> k7 = rhs(s + h, y1);
    st.rhs_evals += 6;

    const VectorX<Scalar> e =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    if (!y1.allFinite() || !e.allFinite())
      raise(ErrorCode::NonFiniteState, "state became non-finite during integration");

    Scalar err_sq = Scalar(0);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const Scalar sc = abs_tol + rel_tol * std::max(std::abs(y(i)), std::abs(y1(i)));
      const Scalar q = e(i) / sc;
      err_sq += q * q;
    }
    const Scalar err = std::sqrt(err_sq / Scalar(y.size()));

    if (err <= Scalar(1)) {
      s += h;
      y = y1;
      k1 = k7;  // first-same-as-last
      ++st.accepted;
      if (dir * (s1 - s) <= Scalar(0)) return y;
      const Scalar fac = Scalar(0.9) * std::pow(std::max(err, Scalar(1e-10)), Scalar(-0.7 / 5)) *
                         std::pow(std::max(err_prev, Scalar(1e-10)), Scalar(0.4 / 5));
      h *= std::clamp(fac, Scalar(0.2), Scalar(5));
      err_prev = std::max(err, Scalar(1e-4));
    } else {
      ++st.rejected;
      const Scalar fac = Scalar(0.9) * std::pow(err, Scalar(-0.2));
      h *= std::clamp(fac, Scalar(0.1), Scalar(1));
    }
    if (std::abs(h) < h_min)
      raise(ErrorCode::StepUnderflow, "step size underflow in adaptive integration");
  }
  raise(ErrorCode::StepUnderflow, "step budget exhausted in adaptive integration");
}

}  // namespace polygauss
