#pragma once
// Numerically careful binomial pmf and tail sums.
//
// The pmf is evaluated through the saddle-point decomposition
//
//   log pmf(n,p,y) = stirlerr(n) - stirlerr(y) - stirlerr(n-y)
//                    - bd0(y, n p) - bd0(n-y, n(1-p))
//                    - 0.5 log(2 pi y (n-y)/n)
//
// (Loader's method) instead of lgamma differences: the deviance terms bd0
// avoid the catastrophic cancellation of log n! - log y! - log(n-y)! and keep
// the relative error near machine epsilon, below 1e-13 for n <= 1e5.
//
// Tail probabilities are always computed by summing the pmf over the tail's
// own support, never as 1 - (complement): starting from the largest term (the
// mode, clamped into range) and walking outward with compensated (Kahan)
// accumulation. The kernel is templated on the floating type; callers that
// sit close to strict-comparison boundaries use the long double instantiation.

#include <cmath>
#include <concepts>
#include <numbers>

#include "batchvote/types.hpp"

namespace batchvote::binom {

// Number of trials and success probability of a binomial distribution.
// Invariants: n >= 0, 0 < p < 1.
struct BinomialSpec {
  BinomialSpec(long n_, double p_) : n(n_), p(p_) {
    if (n < 0)
      throw OutOfRangeError("n", "trial count must be >= 0, got " +
                                     std::to_string(n));
    if (!(p > 0.0) || !(p < 1.0))
      throw OutOfRangeError("p", "probability must lie in (0,1), got " +
                                     std::to_string(p));
  }

  long n;
  double p;
};

namespace detail {

// log(n!) - [0.5 log(2 pi n) + n log n - n]. Exact-ish lgamma for small n,
// asymptotic series beyond; the series' first dropped term at n = 31 is
// below 4e-17, far inside both double and long double needs.
template <std::floating_point Real>
Real stirlerr(long n) {
  if (n <= 30) {
    Real rn = static_cast<Real>(n);
    return std::lgamma(rn + 1) -
           ((rn + Real(0.5)) * std::log(rn) - rn +
            Real(0.5) * std::log(2 * std::numbers::pi_v<Real>));
  }
  const Real s0 = Real(1) / 12, s1 = Real(1) / 360, s2 = Real(1) / 1260,
             s3 = Real(1) / 1680, s4 = Real(1) / 1188;
  Real rn = static_cast<Real>(n);
  Real nn = rn * rn;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / rn;
}

// Binomial deviance x log(x/m) + m - x, stable when x is close to m.
template <std::floating_point Real>
Real bd0(Real x, Real m) {
  if (std::abs(x - m) < Real(0.1) * (x + m)) {
    Real v = (x - m) / (x + m);
    Real s = (x - m) * v;
    Real term = 2 * x * v;
    Real v2 = v * v;
    for (int j = 1;; ++j) {
      term *= v2;
      Real s1 = s + term / Real(2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
  }
  return x * std::log(x / m) + m - x;
}

template <std::floating_point Real>
Real pmf_impl(long n, Real p, long y) {
  Real omp = 1 - p;
  if (n == 0) return Real(1);
  if (n == 1) return y == 1 ? p : omp;  // exact; downstream closed forms rely on it
  if (y == 0) return std::exp(static_cast<Real>(n) * std::log1p(-p));
  if (y == n) return std::exp(static_cast<Real>(n) * std::log(p));
  Real rn = static_cast<Real>(n), ry = static_cast<Real>(y),
       rny = static_cast<Real>(n - y);
  Real lc = stirlerr<Real>(n) - stirlerr<Real>(y) - stirlerr<Real>(n - y) -
            bd0<Real>(ry, rn * p) - bd0<Real>(rny, rn * omp);
  Real lf = std::log(2 * std::numbers::pi_v<Real>) + std::log(ry) +
            std::log1p(-ry / rn);
  return std::exp(lc - Real(0.5) * lf);
}

template <std::floating_point Real>
struct Kahan {
  Real sum = 0, carry = 0;
  void add(Real x) {
    Real y = x - carry;
    Real t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

// Sum of pmf(n,p,y) over y in [lo, hi], accumulated from the largest term
// (the mode clamped into range) outward so additions run largest-to-smallest
// on each side; Kahan compensation mops up the rest.
template <std::floating_point Real>
Real pmf_range_sum(long n, Real p, long lo, long hi) {
  if (lo < 0) lo = 0;
  if (hi > n) hi = n;
  if (lo > hi) return Real(0);
  long mode = static_cast<long>(std::floor(static_cast<Real>(n + 1) * p));
  if (mode < lo) mode = lo;
  if (mode > hi) mode = hi;
  Kahan<Real> acc;
  acc.add(pmf_impl<Real>(n, p, mode));
  for (long y = mode - 1; y >= lo; --y) acc.add(pmf_impl<Real>(n, p, y));
  for (long y = mode + 1; y <= hi; ++y) acc.add(pmf_impl<Real>(n, p, y));
  return acc.sum;
}

// P(X >= (k+1)/2) for X ~ Binomial(k, p), k odd: the majority tail.
template <std::floating_point Real>
Real majority_tail_impl(long k, Real p) {
  return pmf_range_sum<Real>(k, p, (k + 1) / 2, k);
}

inline void require_odd_batch(long k) {
  if (k < 1 || k % 2 == 0)
    throw DomainError("batch size must be odd and >= 1, got " +
                      std::to_string(k));
}

}  // namespace detail

// P(X = y) for X ~ Binomial(spec.n, spec.p).
inline double pmf(const BinomialSpec& spec, long y) {
  if (y < 0 || y > spec.n)
    throw DomainError("pmf outcome must lie in [0, n], got y = " +
                      std::to_string(y) + " with n = " +
                      std::to_string(spec.n));
  return detail::pmf_impl<double>(spec.n, spec.p, y);
}

// Probability that an odd-size batch of k independent signals with success
// probability q produces a strict majority of successes: P(X_k >= (k+1)/2).
inline double majority_tail(long k, double q) {
  detail::require_odd_batch(k);
  BinomialSpec spec(k, q);  // validates q
  return detail::majority_tail_impl<double>(k, q);
}

// P(X >= ceil(threshold)); thresholds at or below 0 give 1, above n give 0.
inline double tail(const BinomialSpec& spec, double threshold) {
  double t = std::ceil(threshold);
  if (t <= 0) return 1.0;
  if (t > static_cast<double>(spec.n)) return 0.0;
  return detail::pmf_range_sum<double>(spec.n, spec.p,
                                       static_cast<long>(t), spec.n);
}

// Verifies K * C(K-1, y-1) == y * C(K, y) in exact integer arithmetic.
// The identity converts per-recipient allocation odds into plain binomial
// tails; everything downstream that mixes the two routes leans on it.
// Guarded to K <= 60 so the Pascal row fits comfortably in 64 bits.
inline bool combinatorial_identity_check(int k, int y) {
  if (k < 1 || k > 60)
    throw CostGuardError("combinatorial identity check limited to 1 <= K <= 60, got " +
                         std::to_string(k));
  if (y < 1 || y > k)
    throw DomainError("identity requires 1 <= y <= K, got y = " +
                      std::to_string(y));
  // C(k, j) for the full row, exact in 64 bits for k <= 60.
  auto choose = [](int n, int j) {
    unsigned long long c = 1;
    if (j > n - j) j = n - j;
    for (int i = 1; i <= j; ++i) {
      // c * (n - j + i) is exact: intermediate fits in 128 bits.
      unsigned __int128 t = static_cast<unsigned __int128>(c) * (n - j + i);
      c = static_cast<unsigned long long>(t / i);
    }
    return c;
  };
  unsigned __int128 lhs =
      static_cast<unsigned __int128>(k) * choose(k - 1, y - 1);
  unsigned __int128 rhs = static_cast<unsigned __int128>(y) * choose(k, y);
  return lhs == rhs;
}

}  // namespace batchvote::binom
