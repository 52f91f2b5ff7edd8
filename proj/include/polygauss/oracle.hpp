#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <thread>
#include <vector>

#include "polygauss/complex.hpp"
#include "polygauss/rng.hpp"
#include "polygauss/types.hpp"

namespace polygauss {

enum class OracleMethod { MC, QMC };

template <typename Scalar>
struct OracleEstimate {
  Scalar value = Scalar(0);
  Scalar std_error = Scalar(0);
  std::int64_t samples = 0;
  OracleMethod method = OracleMethod::MC;
};

namespace detail {

inline int oracle_thread_count() {
  if (const char* env = std::getenv("POLYGAUSS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return std::min(v, 256);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(std::min(hc, 32u)) : 1;
}

// Runs `per_sample(sample_index, x, acc)` over standard normal draws, chunked
// across threads.  Accumulators are integer counts, so the reduction is exact
// and independent of the thread schedule.
template <typename Scalar, typename Fn>
std::vector<std::int64_t> mc_accumulate(Eigen::Index d, std::int64_t samples,
                                        std::uint64_t seed, int n_acc, Fn&& per_sample) {
  const int threads = std::max(1, std::min<int>(oracle_thread_count(),
                                                static_cast<int>(samples / 8192) + 1));
  std::vector<std::vector<std::int64_t>> partial(
      static_cast<std::size_t>(threads), std::vector<std::int64_t>(n_acc, 0));

  auto worker = [&](int tid) {
    const std::int64_t lo = samples * tid / threads;
    const std::int64_t hi = samples * (tid + 1) / threads;
    VectorX<Scalar> x(d);
    auto& acc = partial[static_cast<std::size_t>(tid)];
    for (std::int64_t s = lo; s < hi; ++s) {
      for (Eigen::Index i = 0; i < d; ++i)
        x(i) = Scalar(standard_normal(seed, static_cast<std::uint64_t>(s),
                                      static_cast<std::uint64_t>(i)));
      per_sample(s, x, acc.data());
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  std::vector<std::int64_t> total(static_cast<std::size_t>(n_acc), 0);
  for (const auto& part : partial)
    for (int k = 0; k < n_acc; ++k) total[static_cast<std::size_t>(k)] += part[static_cast<std::size_t>(k)];
  return total;
}

// Mean and standard error for a 0/1 count out of N.
template <typename Scalar>
OracleEstimate<Scalar> binomial_estimate(std::int64_t count, std::int64_t n, Scalar sign) {
  OracleEstimate<Scalar> est;
  est.samples = n;
  const Scalar mean = Scalar(count) / Scalar(n);
  est.value = sign * mean;
  if (n > 1) {
    const Scalar var = (Scalar(count) - Scalar(n) * mean * mean) / Scalar(n - 1);
    est.std_error = std::sqrt(std::max(var, Scalar(0)) / Scalar(n));
  }
  return est;
}

// Randomly shifted rank-1 lattice with a Korobov generating vector; the
// estimate averages 16 independent shifts and reports their spread.
template <typename Scalar, typename Pred>
OracleEstimate<Scalar> qmc_indicator(Eigen::Index d, std::int64_t samples,
                                     std::uint64_t seed, Pred&& pred) {
  constexpr int kShifts = 16;
  const std::int64_t n = std::max<std::int64_t>(samples / kShifts, 2);
  std::uint64_t gen = static_cast<std::uint64_t>(0.3819660112501051 * static_cast<double>(n));
  if (gen < 1) gen = 1;
  while (std::gcd(gen, static_cast<std::uint64_t>(n)) != 1) ++gen;

  std::vector<std::uint64_t> z(static_cast<std::size_t>(d));
  z[0] = 1;
  for (Eigen::Index i = 1; i < d; ++i)
    z[static_cast<std::size_t>(i)] =
        (z[static_cast<std::size_t>(i - 1)] * gen) % static_cast<std::uint64_t>(n);

  VectorX<Scalar> shift_mean(kShifts);
  VectorX<Scalar> x(d);
  for (int sh = 0; sh < kShifts; ++sh) {
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < d; ++k) {
        const double frac_part =
            std::fmod(static_cast<double>(i) * static_cast<double>(z[static_cast<std::size_t>(k)]) /
                              static_cast<double>(n) +
                          uniform01(seed, 0x514d43ull + static_cast<std::uint64_t>(sh),
                                    static_cast<std::uint64_t>(k)),
                      1.0);
        const double u = std::min(std::max(frac_part, 0x1p-53), 1.0 - 0x1p-53);
        x(k) = Scalar(inverse_normal_cdf(u));
      }
      if (pred(x)) ++count;
    }
    shift_mean(sh) = Scalar(count) / Scalar(n);
  }

  OracleEstimate<Scalar> est;
  est.method = OracleMethod::QMC;
  est.samples = n * kShifts;
  est.value = shift_mean.mean();
  const Scalar var = (shift_mean.array() - est.value).square().sum() / Scalar(kShifts - 1);
  est.std_error = std::sqrt(std::max(var, Scalar(0)) / Scalar(kShifts));
  return est;
}

}  // namespace detail

/// Monte-Carlo estimate of the Gaussian content of the polyhedron: the mean of
/// the product of Heaviside factors over standard normal draws.  Ties
/// f_j(x) = 0 count as inside (H(0) = 1).  Deterministic for a fixed seed.
template <typename Scalar>
OracleEstimate<Scalar> estimate_phi(const HPolyhedron<Scalar>& p, std::int64_t samples,
                                    std::uint64_t seed, OracleMethod method = OracleMethod::MC) {
  const MatrixX<Scalar> at = p.a.transpose();
  auto inside = [&](const VectorX<Scalar>& x) {
    return ((at * x + p.b).array() >= Scalar(0)).all();
  };
  if (method == OracleMethod::QMC)
    return detail::qmc_indicator<Scalar>(p.dim(), samples, seed, inside);

  auto counts = detail::mc_accumulate<Scalar>(
      p.dim(), samples, seed, 1,
      [&](std::int64_t, const VectorX<Scalar>& x, std::int64_t* acc) {
        if (inside(x)) ++acc[0];
      });
  return detail::binomial_estimate<Scalar>(counts[0], samples, Scalar(1));
}

/// Signed inclusion-exclusion term: the mean of
/// prod_{j in F} (H(f_j) - 1) = (-1)^{|F|} 1{f_j < 0 for all j in F}.
/// F = {} integrates the constant 1 exactly.
template <typename Scalar>
OracleEstimate<Scalar> estimate_phi_F(const HPolyhedron<Scalar>& p, const FaceSet& F,
                                      std::int64_t samples, std::uint64_t seed,
                                      OracleMethod method = OracleMethod::MC) {
  if (F.empty()) {
    OracleEstimate<Scalar> est;
    est.value = Scalar(1);
    est.samples = samples;
    est.method = method;
    return est;
  }
  const Scalar sign = (F.size() % 2 == 0) ? Scalar(1) : Scalar(-1);
  auto in_negative_cell = [&](const VectorX<Scalar>& x) {
    for (int j : F)
      if (p.evaluate(j, x) >= Scalar(0)) return false;
    return true;
  };
  if (method == OracleMethod::QMC) {
    auto est = detail::qmc_indicator<Scalar>(p.dim(), samples, seed, in_negative_cell);
    est.value *= sign;
    return est;
  }
  auto counts = detail::mc_accumulate<Scalar>(
      p.dim(), samples, seed, 1,
      [&](std::int64_t, const VectorX<Scalar>& x, std::int64_t* acc) {
        if (in_negative_cell(x)) ++acc[0];
      });
  return detail::binomial_estimate<Scalar>(counts[0], samples, sign);
}

/// |phi_hat - sum_F phi_F_hat| under common random numbers.  The summands
/// cancel sample by sample whenever the inclusion-exclusion identity holds
/// pointwise, so the residual is pure floating-point accumulation.
template <typename Scalar>
Scalar check_decomposition(const HPolyhedron<Scalar>& p, const SimplicialComplex& complex,
                           std::int64_t samples, std::uint64_t seed) {
  Scalar total = Scalar(0);
  for (const auto& F : complex.faces())
    total += estimate_phi_F(p, F, samples, seed).value;
  return std::abs(estimate_phi(p, samples, seed).value - total);
}

/// Central finite difference of the Monte-Carlo phi in the offsets indexed by
/// J (|J| <= 2), sharing one stream of draws across every stencil point.
template <typename Scalar>
Scalar fd_derivative(const HPolyhedron<Scalar>& p, const FaceSet& J, Scalar h,
                     std::int64_t samples, std::uint64_t seed) {
  if (J.size() > 2)
    throw std::invalid_argument("mixed differences beyond order 2 are too noisy");
  if (J.empty()) return estimate_phi(p, samples, seed).value;

  const MatrixX<Scalar> at = p.a.transpose();
  const Eigen::Index n = p.n_constraints();
  VectorX<Scalar> f(n);

  if (J.size() == 1) {
    const Eigen::Index j = J[0] - 1;
    auto counts = detail::mc_accumulate<Scalar>(
        p.dim(), samples, seed, 2,
        [&, f](std::int64_t, const VectorX<Scalar>& x, std::int64_t* acc) mutable {
          f = at * x + p.b;
          const Scalar fj = f(j);
          f(j) = fj + h;
          if ((f.array() >= Scalar(0)).all()) ++acc[0];
          f(j) = fj - h;
          if ((f.array() >= Scalar(0)).all()) ++acc[1];
        });
    return Scalar(counts[0] - counts[1]) / (Scalar(samples) * 2 * h);
  }

  const Eigen::Index j = J[0] - 1;
  const Eigen::Index k = J[1] - 1;
  auto counts = detail::mc_accumulate<Scalar>(
      p.dim(), samples, seed, 4,
      [&, f](std::int64_t, const VectorX<Scalar>& x, std::int64_t* acc) mutable {
        f = at * x + p.b;
        const Scalar fj = f(j), fk = f(k);
        const Scalar sj[2] = {h, -h}, sk[2] = {h, -h};
        for (int u = 0; u < 2; ++u) {
          for (int v = 0; v < 2; ++v) {
            f(j) = fj + sj[u];
            f(k) = fk + sk[v];
            if ((f.array() >= Scalar(0)).all()) ++acc[2 * u + v];
          }
        }
      });
  // (+,+) - (+,-) - (-,+) + (-,-)
  return Scalar(counts[0] - counts[1] - counts[2] + counts[3]) /
         (Scalar(samples) * 4 * h * h);
}

}  // namespace polygauss
