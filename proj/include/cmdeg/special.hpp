#pragma once

#include "cmdeg/hp_real.hpp"
#include "cmdeg/precision.hpp"
#include "cmdeg/rational.hpp"

#include <vector>

namespace cmdeg {

/// log Gamma(x) for x > 0 with errBound <= 10^-(workingDigits-5).
/// Argument-shift recurrence into the Stirling regime; the truncation error
/// is bounded by the first omitted term of the asymptotic series.
HPReal log_gamma(const Real& x, const PrecisionContext& ctx);

/// psi^(order)(x) for x > 0; order 0 is the digamma function.
HPReal polygamma(unsigned order, const Real& x, const PrecisionContext& ctx);

/// Laguerre polynomial L_m(t) by the three-term upward recurrence.
HPReal laguerre(unsigned m, const Real& t, const PrecisionContext& ctx);

/// L_0(t) .. L_max(t) in one recurrence sweep (shared by kernel sums and the
/// Szego-bound scans).
std::vector<HPReal> laguerre_sweep(unsigned m_max, const HPReal& t);

}  // namespace cmdeg
