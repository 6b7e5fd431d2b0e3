#pragma once
// Exact-rational binomial tails. This is the verification side of the binom
// kernel: given a rational success probability q_num/q_den it returns the
// tail mass as an exact fraction, so floating-point routes can be checked
// against ground truth. Big-integer plumbing comes from
// boost::multiprecision (header-only).

#include <boost/multiprecision/cpp_int.hpp>

#include "batchvote/types.hpp"

namespace batchvote::binom {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

namespace detail {

inline BigInt big_choose(long n, long y) {
  if (y < 0 || y > n) return 0;
  if (y > n - y) y = n - y;
  BigInt c = 1;
  for (long i = 1; i <= y; ++i) {
    c *= n - y + i;
    c /= i;  // exact at every step
  }
  return c;
}

// Unguarded exact upper tail: P(X >= lo) for X ~ Binomial(n, num/den).
inline BigRational tail_rational_unchecked(long n, long num, long den,
                                           long lo) {
  if (lo > n) return BigRational(0);
  if (lo < 0) lo = 0;
  BigInt miss = den - num;
  BigInt acc = 0;
  for (long y = lo; y <= n; ++y) {
    BigInt term = big_choose(n, y);
    term *= boost::multiprecision::pow(BigInt(num), static_cast<unsigned>(y));
    term *= boost::multiprecision::pow(miss, static_cast<unsigned>(n - y));
    acc += term;
  }
  return BigRational(acc, boost::multiprecision::pow(
                              BigInt(den), static_cast<unsigned>(n)));
}

}  // namespace detail

// Correctly rounded-to-few-ulp conversion that cannot overflow on huge
// numerator/denominator pairs: the quotient is computed with ~192 extra bits
// then scaled back.
inline double to_double(const BigRational& r) {
  BigInt num = boost::multiprecision::numerator(r);
  BigInt den = boost::multiprecision::denominator(r);
  if (num == 0) return 0.0;
  bool negative = num < 0;
  if (negative) num = -num;
  long shift = 192 + static_cast<long>(boost::multiprecision::msb(den)) -
               static_cast<long>(boost::multiprecision::msb(num));
  if (shift < 0) shift = 0;
  BigInt scaled = (num << static_cast<unsigned>(shift)) / den;
  double out = std::ldexp(scaled.convert_to<double>(),
                          static_cast<int>(-shift));
  return negative ? -out : out;
}

// Exact tail P(X >= max(threshold, 0)) for X ~ Binomial(k, q_num/q_den),
// k odd. Kept behind a cost guard (K <= 99); verification helpers in the
// test tree cover larger instances.
inline BigRational exact_tail_rational(int k, long q_num, long q_den,
                                       long threshold) {
  detail::require_odd_batch(k);
  if (k > 99)
    throw CostGuardError("exact rational tail limited to K <= 99, got " +
                         std::to_string(k));
  if (q_den <= 0 || q_num <= 0 || q_num >= q_den)
    throw OutOfRangeError("q", "need 0 < q_num/q_den < 1, got " +
                                   std::to_string(q_num) + "/" +
                                   std::to_string(q_den));
  return detail::tail_rational_unchecked(k, q_num, q_den, threshold);
}

}  // namespace batchvote::binom
