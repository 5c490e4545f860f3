#include "cmdeg/special.hpp"

#include <cmath>
#include <stdexcept>

namespace cmdeg {

namespace {

// Shift target for the Stirling series: with y above this, the smallest term
// of the asymptotic series sits far below the tolerance.
Real stirling_threshold(const PrecisionContext& ctx) {
    int d = ctx.internal_digits();
    int t = (2 * d) / 3;
    return Real(t < 20 ? 20 : t);
}

// log Gamma(y) by the Stirling series, valid once y >= threshold.
// Remainder bound: |first omitted term| (alternating enveloping series).
HPReal stirling_log_gamma(const HPReal& y, const PrecisionContext& ctx) {
    HPReal half = HPReal(Real(1)) / HPReal(Real(2));
    HPReal ln_y = log(y);
    HPReal two_pi = HPReal::exact(2L) * pi_hp();
    HPReal acc = (y - half) * ln_y - y + half * log(two_pi);

    // sum_k B_{2k}/((2k)(2k-1)) y^{1-2k}
    HPReal inv_y2 = HPReal::exact(1L) / (y * y);
    HPReal pw = HPReal::exact(1L) / y;  // y^{1-2k} for k=1
    Real tol = ctx.series_tol;
    Real prev_mag = 0;
    bool first = true;
    for (unsigned k = 1; k < 512; ++k) {
        ExactRational c = bernoulli(2 * k) / ExactRational(BigInt(2 * k) * BigInt(2 * k - 1));
        HPReal term = HPReal(Real(c)) * pw;
        Real mag = abs(term.value());
        if (!first && mag >= prev_mag) {
            // Series started diverging before reaching tol: shift was too
            // small. Caller guards against this by choosing the threshold.
            acc.widen(prev_mag);
            return acc;
        }
        if (mag <= tol) {
            acc.widen(mag);
            return acc;
        }
        acc += term;
        prev_mag = mag;
        first = false;
        pw *= inv_y2;
    }
    throw EvaluationError("stirling_log_gamma: series did not truncate");
}

// psi^{(n)}(y) by the asymptotic series, valid once y >= threshold.
HPReal stirling_polygamma(unsigned n, const HPReal& y, const PrecisionContext& ctx) {
    Real tol = ctx.series_tol;
    if (n == 0) {
        // psi(y) = log y - 1/(2y) - sum_k B_{2k}/(2k) y^{-2k}
        HPReal acc = log(y) - HPReal::exact(1L) / (HPReal::exact(2L) * y);
        HPReal inv_y2 = HPReal::exact(1L) / (y * y);
        HPReal pw = inv_y2;
        Real prev_mag = 0;
        bool first = true;
        for (unsigned k = 1; k < 512; ++k) {
            ExactRational c = bernoulli(2 * k) / ExactRational(BigInt(2 * k));
            HPReal term = HPReal(Real(c)) * pw;
            Real mag = abs(term.value());
            if ((!first && mag >= prev_mag) || mag <= tol) {
                acc.widen(mag);
                return acc;
            }
            acc -= term;
            prev_mag = mag;
            first = false;
            pw *= inv_y2;
        }
        throw EvaluationError("stirling_polygamma: series did not truncate");
    }
    // psi^{(n)}(y) = (-1)^{n-1} [ (n-1)!/y^n + n!/(2 y^{n+1})
    //                + sum_k B_{2k} (2k+n-1)!/(2k)! y^{-2k-n} ]
    HPReal inv_y = HPReal::exact(1L) / y;
    HPReal inv_yn = pow_i(inv_y, static_cast<long>(n));
    HPReal fact_nm1 = HPReal::exact(Real(factorial_big(n - 1)));
    HPReal acc = fact_nm1 * inv_yn
                 + HPReal::exact(Real(factorial_big(n))) * inv_yn * inv_y / HPReal::exact(2L);
    HPReal inv_y2 = inv_y * inv_y;
    HPReal pw = inv_yn * inv_y2;  // y^{-2k-n} for k=1
    BigInt rising = factorial_big(n + 1);  // (2k+n-1)! for k=1
    BigInt fact2k = 2;                     // (2k)! for k=1
    Real prev_mag = 0;
    bool first = true;
    for (unsigned k = 1; k < 512; ++k) {
        ExactRational c = bernoulli(2 * k) * ExactRational(rising) / ExactRational(fact2k);
        HPReal term = HPReal(Real(c)) * pw;
        Real mag = abs(term.value());
        if ((!first && mag >= prev_mag) || mag <= tol) {
            acc.widen(mag);
            if ((n % 2) == 0) acc = -acc;
            return acc;
        }
        acc += term;
        prev_mag = mag;
        first = false;
        pw *= inv_y2;
        rising *= BigInt(2 * k + n) * BigInt(2 * k + n + 1);
        fact2k *= BigInt(2 * k + 1) * BigInt(2 * k + 2);
    }
    throw EvaluationError("stirling_polygamma: series did not truncate");
}

}  // namespace

HPReal log_gamma(const Real& x, const PrecisionContext& ctx) {
    if (!(x > 0)) throw std::domain_error("log_gamma: requires x > 0");
    ScopedPrecision guard(ctx);
    Real threshold = stirling_threshold(ctx);
    HPReal xx = HPReal(x);
    if (x >= threshold) return stirling_log_gamma(xx, ctx);
    // log Gamma(x) = log Gamma(x+J) - sum_{j=0}^{J-1} log(x+j)
    Real steps = ceil(threshold - x);
    unsigned long shift = steps.convert_to<unsigned long>();
    HPReal correction = HPReal::exact(0L);
    for (unsigned long j = 0; j < shift; ++j) {
        correction += log(xx + HPReal::exact(static_cast<long>(j)));
    }
    HPReal shifted = stirling_log_gamma(xx + HPReal::exact(static_cast<long>(shift)), ctx);
    return shifted - correction;
}

HPReal polygamma(unsigned order, const Real& x, const PrecisionContext& ctx) {
    if (!(x > 0)) throw std::domain_error("polygamma: requires x > 0");
    ScopedPrecision guard(ctx);
    Real threshold = stirling_threshold(ctx);
    HPReal xx = HPReal(x);
    if (x >= threshold) return stirling_polygamma(order, xx, ctx);
    Real steps = ceil(threshold - x);
    unsigned long shift = steps.convert_to<unsigned long>();
    // psi^{(n)}(x) = psi^{(n)}(x+J) - (-1)^n n! sum_{j<J} (x+j)^{-(n+1)}
    HPReal sum = HPReal::exact(0L);
    for (unsigned long j = 0; j < shift; ++j) {
        sum += pow_i(xx + HPReal::exact(static_cast<long>(j)), -(static_cast<long>(order) + 1));
    }
    sum *= HPReal::exact(Real(factorial_big(order)));
    if (order % 2 == 1) sum = -sum;
    HPReal shifted = stirling_polygamma(order, xx + HPReal::exact(static_cast<long>(shift)), ctx);
    return shifted - sum;
}

HPReal laguerre(unsigned m, const Real& t, const PrecisionContext& ctx) {
    ScopedPrecision guard(ctx);
    auto sweep = laguerre_sweep(m, HPReal(t));
    return sweep[m];
}

std::vector<HPReal> laguerre_sweep(unsigned m_max, const HPReal& t) {
    std::vector<HPReal> out;
    out.reserve(m_max + 1);
    out.push_back(HPReal::exact(1L));  // L_0
    if (m_max == 0) return out;
    out.push_back(HPReal::exact(1L) - t);  // L_1
    for (unsigned m = 1; m < m_max; ++m) {
        // (m+1) L_{m+1} = (2m+1-t) L_m - m L_{m-1}
        HPReal c = HPReal::exact(static_cast<long>(2 * m + 1)) - t;
        HPReal next = (c * out[m] - HPReal::exact(static_cast<long>(m)) * out[m - 1])
                      / HPReal::exact(static_cast<long>(m + 1));
        out.push_back(next);
    }
    return out;
}

}  // namespace cmdeg
