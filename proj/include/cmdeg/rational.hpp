#pragma once

#include "cmdeg/precision.hpp"

#include <boost/multiprecision/gmp.hpp>

#include <cstddef>
#include <vector>

namespace cmdeg {

using BigInt = boost::multiprecision::mpz_int;

/// Arbitrary-size rational, always canonical (lowest terms, positive
/// denominator) — the GMP backend maintains the invariant.
using ExactRational = boost::multiprecision::mpq_rational;

/// Exact Bernoulli number B_k by the defining recurrence
/// sum_{j=0}^{k} C(k+1,j) B_j = 0, B_0 = 1. Memoized; thread-safe.
const ExactRational& bernoulli(unsigned k);

BigInt factorial_big(unsigned n);
BigInt binomial_big(unsigned n, unsigned k);

/// B_{2j}/(2j)! rendered at `digits` decimal digits, for j = 0..max_j.
/// These are the universal series coefficients of the Binet-type kernels;
/// the table is cached per precision and grown lazily. Thread-safe.
const std::vector<Real>& bernoulli_over_factorial(std::size_t max_j, int digits);

/// Exact zeta(2n) as (rational) * pi^{2n}: returns the rational factor
/// (-1)^{n+1} B_{2n} 2^{2n-1} / (2n)!  (n >= 1).
ExactRational zeta_even_pi_factor(unsigned n);

}  // namespace cmdeg
