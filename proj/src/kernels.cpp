#include "cmdeg/kernels.hpp"

#include "cmdeg/quadrature.hpp"
#include "cmdeg/rational.hpp"
#include "cmdeg/special.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace cmdeg {

namespace {

constexpr double kSeriesSwitch = 4.0;  // series below, exponential form above

// ---- shared coefficient table: B_{2j}/(2j)! at a given precision ----------

std::mutex g_table_mutex;
std::map<int, std::shared_ptr<std::vector<Real>>> g_tables;

std::shared_ptr<const std::vector<Real>> coeff_snapshot(std::size_t max_j, int digits) {
    std::lock_guard<std::mutex> lock(g_table_mutex);
    auto& slot = g_tables[digits];
    if (!slot || slot->size() <= max_j) {
        auto grown = std::make_shared<std::vector<Real>>(
            bernoulli_over_factorial(std::max<std::size_t>(max_j, 64), digits));
        slot = grown;
    }
    return slot;
}

// Falling-factorial power a(a-1)...(a-j+1) for integer a (possibly negative).
BigInt ffp_big(long a, unsigned j) {
    BigInt r(1);
    for (unsigned i = 0; i < j; ++i) r *= BigInt(a - static_cast<long>(i));
    return r;
}

Real pi_cached() { return pi_real(); }

// ---- exponential sums -----------------------------------------------------

// (d/dt)^j [ t^P sum_{k>=1} e^{-kt} ]  for integer P (may be negative).
// Certified geometric tail; evaluated at the caller's current precision.
HPReal exp_sum_deriv(long P, unsigned j, const HPReal& t, const Real& tol) {
    // d_i = C(j,i) * ffp(P,i); A_k = sum_i d_i t^{P-i} (-k)^{j-i} e^{-kt}
    std::vector<HPReal> coef;  // d_i * t^{P-i}
    std::vector<Real> coef_abs;
    coef.reserve(j + 1);
    HPReal tp = pow_i(t, P);
    for (unsigned i = 0; i <= j; ++i) {
        BigInt d = binomial_big(j, i) * ffp_big(P, i);
        HPReal c = HPReal(Real(d)) * tp;
        coef.push_back(c);
        coef_abs.push_back(abs(c.value()) + c.err());
        tp = tp / t;
    }
    HPReal q = exp(-t);
    HPReal ek = q;
    HPReal acc = HPReal::exact(0L);
    const unsigned long k_cap = 200000;
    for (unsigned long k = 1; k <= k_cap; ++k) {
        // inner polynomial in k
        HPReal inner = HPReal::exact(0L);
        Real inner_env = 0;
        Real kp = 1;  // k^{j-i} built downward: start with k^j
        std::vector<Real> kpow(j + 1);
        for (unsigned i = 0; i <= j; ++i) kpow[j - i] = 0;  // placeholder
        // build k^0..k^j
        {
            Real acc_p = 1;
            for (unsigned e = 0; e <= j; ++e) {
                kpow[e] = acc_p;
                acc_p *= Real(k);
            }
        }
        (void)kp;
        for (unsigned i = 0; i <= j; ++i) {
            unsigned e = j - i;
            Real kfac = kpow[e];
            bool neg = ((e % 2) == 1);  // (-k)^{j-i}
            HPReal piece = coef[i] * HPReal::exact(kfac);
            inner += neg ? -piece : piece;
            inner_env += coef_abs[i] * kfac;
        }
        acc += ek * inner;
        // tail bound: E_k' <= E_k * rho^{k'-k}, rho = e^{-t}((k+1)/k)^j
        Real env_k = (abs(ek.value()) + ek.err()) * inner_env;
        Real rho = (abs(q.value()) + q.err());
        if (j > 0) {
            Real ratio = Real(k + 1) / Real(k);
            rho *= boost::multiprecision::pow(ratio, static_cast<int>(j));
        }
        if (rho < 1) {
            Real tail = env_k * rho / (1 - rho);
            if (tail <= tol) {
                acc.widen(tail);
                return acc;
            }
        }
        ek *= q;
    }
    throw EvaluationError("exp_sum_deriv: truncation bound not reached");
}

// ---- series form of (d/dt)^j [ t^w g_n(t) ] -------------------------------

HPReal series_g_weighted(int n, unsigned w, unsigned j, const HPReal& t,
                         const PrecisionContext& ctx) {
    // (-1)^{n+1} sum_{j' >= n+2} c_{j'} ffp(2j'-2+w, j) t^{2j'-2+w-j}
    const Real tol = ctx.series_tol;
    long start = std::max<long>(n + 2, 1);
    // skip terms whose monomial is annihilated by the derivative
    while (2 * start - 2 + static_cast<long>(w) < static_cast<long>(j)) ++start;
    auto table = coeff_snapshot(static_cast<std::size_t>(start) + 64, ctx.internal_digits());

    long a = 2 * start - 2 + static_cast<long>(w);
    HPReal ff = HPReal(Real(ffp_big(a, j)));
    HPReal pw = pow_i(t, a - static_cast<long>(j));
    HPReal t2 = t * t;
    Real four_pi_sq = 4 * pi_cached() * pi_cached();
    Real rho_base = (abs(t.value()) + t.err());
    rho_base = rho_base * rho_base / four_pi_sq;

    HPReal acc = HPReal::exact(0L);
    bool added = false;
    const bool flip = ((n + 1) % 2 + 2) % 2 == 1;  // (-1)^{n+1} < 0 ?
    for (long j2 = start, iter = 0; iter < 6000; ++j2, ++iter) {
        if (static_cast<std::size_t>(j2) >= table->size())
            table = coeff_snapshot(static_cast<std::size_t>(j2) + 64, ctx.internal_digits());
        HPReal c = HPReal((*table)[static_cast<std::size_t>(j2)]);
        HPReal term = c * ff * pw;
        Real mag = abs(term.value()) + term.err();
        // geometric tail bound valid from here on
        Real rho = rho_base * Real((a + 2) * (a + 1))
                   / Real((a + 2 - static_cast<long>(j)) * (a + 1 - static_cast<long>(j)));
        if (added && rho < Real(0.999)) {
            Real tail_bound = mag / (1 - rho);
            if (tail_bound <= tol) {
                acc.widen(tail_bound);
                return flip ? -acc : acc;
            }
        }
        acc += term;
        added = true;
        // advance: a -> a+2
        HPReal ratio = HPReal(Real((a + 2) * (a + 1)))
                       / HPReal(Real((a + 2 - static_cast<long>(j)) * (a + 1 - static_cast<long>(j))));
        ff *= ratio;
        pw *= t2;
        a += 2;
    }
    throw EvaluationError("series_g_weighted: series did not truncate (t too close to 2*pi?)");
}

// ---- exponential form of (d/dt)^j [ t^w g_n(t) ] --------------------------

HPReal exp_g_weighted(int n, unsigned w, unsigned j, const HPReal& t,
                      const PrecisionContext& ctx) {
    // (-1)^n [ D^j t^{w-2} - D^j t^{w-1}/2 - expSumDeriv(w-1, j, t)
    //         + sum_{k=1}^{n+1} B_{2k}/(2k)! ffp(2k-2+w, j) t^{2k-2+w-j} ]
    const Real tol = ctx.series_tol;
    long lw = static_cast<long>(w);
    long lj = static_cast<long>(j);
    auto mono_deriv = [&](long a) -> HPReal {
        if (a >= 0 && a < lj) return HPReal::exact(0L);
        return HPReal(Real(ffp_big(a, j))) * pow_i(t, a - lj);
    };
    HPReal acc = mono_deriv(lw - 2) - mono_deriv(lw - 1) / HPReal::exact(2L);
    acc -= exp_sum_deriv(lw - 1, j, t, tol);
    if (n >= 0) {
        auto table = coeff_snapshot(static_cast<std::size_t>(n) + 2, ctx.internal_digits());
        for (long k = 1; k <= n + 1; ++k) {
            long a = 2 * k - 2 + lw;
            if (a >= 0 && a < lj) continue;
            HPReal c = HPReal((*table)[static_cast<std::size_t>(k)]);
            acc += c * HPReal(Real(ffp_big(a, j))) * pow_i(t, a - lj);
        }
    }
    if ((((n % 2) + 2) % 2) == 1) acc = -acc;
    return acc;
}

}  // namespace

HPReal g_weighted_deriv(int n, unsigned w, unsigned j, const Real& t,
                        const PrecisionContext& ctx, KernelPath path) {
    if (!(t > 0)) throw std::domain_error("g_weighted_deriv: requires t > 0");
    if (n < -1) throw std::invalid_argument("g_weighted_deriv: index must be >= -1");
    HPReal tt = HPReal::exact(t);
    switch (path) {
        case KernelPath::small_t_series: {
            ScopedPrecision guard(ctx);
            if (!(t < 2 * pi_cached()))
                throw std::invalid_argument("g_weighted_deriv: series representation requires t < 2*pi");
            return series_g_weighted(n, w, j, tt, ctx);
        }
        case KernelPath::laguerre_sum:
        case KernelPath::integral_rep:
            throw std::invalid_argument("g_weighted_deriv: unsupported representation");
        case KernelPath::auto_select:
        default: {
            if (t < kSeriesSwitch) {
                ScopedPrecision guard(ctx);
                return series_g_weighted(n, w, j, tt, ctx);
            }
            // the closed form cancels a few digits; run with extra guard
            PrecisionContext raised = ctx.with_extra_guard(15);
            ScopedPrecision guard(raised);
            return exp_g_weighted(n, w, j, tt, raised);
        }
    }
}

HPReal binet_g(unsigned n, const Real& t, const PrecisionContext& ctx) {
    if (!(t > 0)) throw std::domain_error("binet_g: requires t > 0");
    return g_weighted_deriv(static_cast<int>(n), 0, 0, t, ctx);
}

HPReal binet_f(unsigned n, const Real& t, const PrecisionContext& ctx) {
    if (!(t > 0)) throw std::domain_error("binet_f: requires t > 0");
    return g_weighted_deriv(static_cast<int>(n), 1, 0, t, ctx);
}

HPReal binet_g_deriv(unsigned n, unsigned j, const Real& t, const PrecisionContext& ctx,
                     KernelPath path) {
    if (!(t > 0)) throw std::domain_error("binet_g_deriv: requires t > 0");
    if (j > 2 * n + 2)
        throw std::invalid_argument("binet_g_deriv: derivative order above 2n+2 is unsupported");
    if (path == KernelPath::integral_rep) {
        if (j == 2 * n) return osc_log_moment(n, t, ctx).value;
        if (j == 2 * n + 1) return osc_sine_moment(n, t, ctx).value;
        throw std::invalid_argument("binet_g_deriv: integral representation needs j = 2n or 2n+1");
    }
    return g_weighted_deriv(static_cast<int>(n), 0, j, t, ctx, path);
}

HPReal binet_f_closed(unsigned n, const Real& t, const PrecisionContext& ctx) {
    if (!(t > 0)) throw std::domain_error("binet_f_closed: requires t > 0");
    double td = t.convert_to<double>();
    int extra = 12;
    if (td < 6.283) extra += static_cast<int>((2.0 * n + 6.0) * std::log10(6.2832 / td)) + 2;
    PrecisionContext raised = ctx.with_extra_guard(extra);
    ScopedPrecision guard(raised);
    HPReal tt = HPReal::exact(t);
    HPReal acc = HPReal::exact(1L) / tt
                 - coth_pos(tt / HPReal::exact(2L)) / HPReal::exact(2L);
    auto table = coeff_snapshot(static_cast<std::size_t>(n) + 2, raised.internal_digits());
    HPReal pw = tt;
    for (unsigned k = 1; k <= n + 1; ++k) {
        acc += HPReal((*table)[k]) * pw;
        pw *= tt * tt;
    }
    if (n % 2 == 1) acc = -acc;
    return acc;
}

HPReal g_weighted_tail_lower_bound(int n, unsigned w, unsigned j, const Real& T,
                                   const PrecisionContext& ctx) {
    HPReal not_certified(Real(0), Real(1));
    long lw = static_cast<long>(w);
    long lj = static_cast<long>(j);
    if (!(T >= Real(6)) || !(T >= Real(lw + 1))) return not_certified;
    PrecisionContext raised = ctx.with_extra_guard(10);
    ScopedPrecision guard(raised);
    HPReal tt = HPReal::exact(T);

    const int sign_n = (((n % 2) + 2) % 2) == 1 ? -1 : 1;
    struct Term {
        long expo;
        HPReal coef;  // signed, including the (-1)^n factor
    };
    std::vector<Term> terms;
    auto add_mono = [&](long a, const HPReal& c) {
        if (a >= 0 && a < lj) return;
        HPReal coef = c * HPReal(Real(ffp_big(a, j)));
        if (sign_n < 0) coef = -coef;
        terms.push_back({a - lj, coef});
    };
    add_mono(lw - 2, HPReal::exact(1L));
    add_mono(lw - 1, HPReal::exact(-1L) / HPReal::exact(2L));
    if (n >= 0) {
        auto table = coeff_snapshot(static_cast<std::size_t>(n) + 2, raised.internal_digits());
        for (long k = 1; k <= n + 1; ++k) add_mono(2 * k - 2 + lw, HPReal((*table)[static_cast<std::size_t>(k)]));
    }
    if (terms.empty()) return not_certified;
    auto dom = std::max_element(terms.begin(), terms.end(),
                                [](const Term& a, const Term& b) { return a.expo < b.expo; });
    if (dom->expo < 0 || !dom->coef.certainly_positive()) return not_certified;

    // envelope of the exponential part at T (decreasing for t >= w)
    Real tolr = raised.series_tol;
    HPReal exp_env = HPReal::exact(0L);
    {
        HPReal tp = pow_i(tt, lw - 1);
        HPReal q = exp(-tt);
        std::vector<HPReal> cabs;
        for (unsigned i = 0; i <= j; ++i) {
            BigInt d = binomial_big(j, i) * ffp_big(lw - 1, i);
            if (d < 0) d = -d;
            cabs.push_back(HPReal(Real(d)) * tp);
            tp = tp / tt;
        }
        HPReal ek = q;
        for (unsigned long k = 1; k <= 4000; ++k) {
            HPReal inner = HPReal::exact(0L);
            Real kf = 1;
            std::vector<Real> kpow(j + 1);
            for (unsigned e = 0; e <= j; ++e) {
                kpow[e] = kf;
                kf *= Real(k);
            }
            for (unsigned i = 0; i <= j; ++i) inner += cabs[i] * HPReal::exact(kpow[j - i]);
            exp_env += ek * inner;
            Real rho = (abs(q.value()) + q.err());
            if (j > 0) rho *= boost::multiprecision::pow(Real(k + 1) / Real(k), static_cast<int>(j));
            Real env_k = (abs(ek.value()) + ek.err()) * (abs(inner.value()) + inner.err());
            if (rho < 1 && env_k * rho / (1 - rho) <= tolr) {
                exp_env.widen(env_k * rho / (1 - rho));
                break;
            }
            ek *= q;
        }
    }

    // M0 = T^{e_dom} (c_dom - sum_{other} |c_i| T^{e_i - e_dom}) - envelope
    HPReal bracket = dom->coef;
    for (const auto& tm : terms) {
        if (&tm == &*dom) continue;
        bracket -= abs(tm.coef) * pow_i(tt, tm.expo - dom->expo);
    }
    if (!bracket.certainly_positive()) return not_certified;
    HPReal bound = pow_i(tt, dom->expo) * bracket - exp_env;
    return bound;
}

// ---- zeta tails and the sine-series kernel --------------------------------

namespace {

// sum_{k > K} k^{-s} for integer s >= 2 by Euler–Maclaurin with the
// first-omitted-term remainder bound.
HPReal zeta_tail(unsigned s, unsigned long K, const Real& tol) {
    HPReal Kr = HPReal::exact(static_cast<long>(K));
    HPReal inv_K = HPReal::exact(1L) / Kr;
    HPReal inv_Ks = pow_i(inv_K, static_cast<long>(s));
    // K^{1-s}/(s-1) - K^{-s}/2
    HPReal acc = inv_Ks * Kr / HPReal::exact(static_cast<long>(s - 1))
                 - inv_Ks / HPReal::exact(2L);
    // + sum_i B_{2i}/(2i)! (s)_{2i-1} K^{-s-2i+1}
    BigInt rising = s;  // (s)_{2i-1} for i=1 is s... (s)_1 = s
    HPReal pw = inv_Ks * inv_K;  // K^{-s-1}; term i uses K^{-s-2i+1}
    Real prev_mag = 0;
    bool first = true;
    for (unsigned i = 1; i < 400; ++i) {
        ExactRational c = bernoulli(2 * i) / ExactRational(factorial_big(2 * i));
        HPReal term = HPReal(Real(c * ExactRational(rising))) * pw * Kr;
        Real mag = abs(term.value()) + term.err();
        if ((!first && mag >= prev_mag) || mag <= tol) {
            acc.widen(mag);
            return acc;
        }
        acc += term;
        prev_mag = mag;
        first = false;
        rising *= BigInt(s + 2 * i - 1) * BigInt(s + 2 * i);
        pw *= inv_K * inv_K;
    }
    throw EvaluationError("zeta_tail: series did not truncate");
}

unsigned long s_direct_terms(const Real& t) {
    Real a = abs(t) / (2 * pi_cached());
    unsigned long base = a.convert_to<unsigned long>();
    return std::max<unsigned long>(64, base + 8);
}

}  // namespace

HPReal s_kernel(const Real& t, const PrecisionContext& ctx) {
    ScopedPrecision guard(ctx);
    const Real tol = ctx.series_tol;
    Real pi_v = pi_cached();
    HPReal a = HPReal::exact(t) / HPReal::exact(2 * pi_v);
    unsigned long K = s_direct_terms(t);
    HPReal direct = HPReal::exact(0L);
    for (unsigned long k = 1; k <= K; ++k) {
        HPReal kk = HPReal::exact(static_cast<long>(k));
        direct += sin(a / kk) / kk;
    }
    // tail: sum_m (-1)^m a^{2m+1}/(2m+1)! zeta_tail(2m+2, K)
    HPReal tail = HPReal::exact(0L);
    HPReal apow = a;                 // a^{2m+1}
    HPReal fact = HPReal::exact(1L); // (2m+1)!
    Real aK = (abs(a.value()) + a.err()) / Real(K);
    for (unsigned m = 0; m < 600; ++m) {
        HPReal zt = zeta_tail(2 * m + 2, K, tol);
        HPReal term = apow / fact * zt;
        Real mag = abs(term.value()) + term.err();
        if (mag <= tol) {
            Real r = aK * aK / Real((2 * m + 2) * (2 * m + 3));
            tail.widen(mag + mag * r / (1 - r));
            break;
        }
        tail += (m % 2 == 0) ? term : -term;
        apow *= a * a;
        fact *= HPReal::exact(static_cast<long>((2 * m + 2)));
        fact *= HPReal::exact(static_cast<long>((2 * m + 3)));
    }
    return HPReal::exact(1L) / HPReal::exact(2L) + (direct + tail) / HPReal::exact(pi_v);
}

HPReal s_kernel_prime(const Real& t, const PrecisionContext& ctx) {
    ScopedPrecision guard(ctx);
    const Real tol = ctx.series_tol;
    Real pi_v = pi_cached();
    HPReal a = HPReal::exact(t) / HPReal::exact(2 * pi_v);
    unsigned long K = s_direct_terms(t);
    HPReal direct = HPReal::exact(0L);
    for (unsigned long k = 1; k <= K; ++k) {
        HPReal kk = HPReal::exact(static_cast<long>(k));
        direct += cos(a / kk) / (kk * kk);
    }
    HPReal tail = HPReal::exact(0L);
    HPReal apow = HPReal::exact(1L);  // a^{2m}
    HPReal fact = HPReal::exact(1L);  // (2m)!
    Real aK = (abs(a.value()) + a.err()) / Real(K);
    for (unsigned m = 0; m < 600; ++m) {
        HPReal zt = zeta_tail(2 * m + 2, K, tol);
        HPReal term = apow / fact * zt;
        Real mag = abs(term.value()) + term.err();
        if (mag <= tol) {
            Real r = aK * aK;
            tail.widen(mag + mag * r / (1 - r));
            break;
        }
        tail += (m % 2 == 0) ? term : -term;
        apow *= a * a;
        fact *= HPReal::exact(static_cast<long>((2 * m + 1)));
        fact *= HPReal::exact(static_cast<long>((2 * m + 2)));
    }
    HPReal two_pi_sq = HPReal::exact(2 * pi_v * pi_v);
    return (direct + tail) / two_pi_sq;
}

HPReal sin2_sum(const Real& v, const PrecisionContext& ctx) {
    ScopedPrecision guard(ctx);
    const Real tol = ctx.series_tol;
    Real pi_v = pi_cached();
    HPReal b = HPReal::exact(v) / HPReal::exact(2 * pi_v);  // cos(b/k) argument
    unsigned long K = s_direct_terms(v);
    HPReal direct = HPReal::exact(0L);
    HPReal four_pi = HPReal::exact(4 * pi_v);
    for (unsigned long k = 1; k <= K; ++k) {
        HPReal kk = HPReal::exact(static_cast<long>(k));
        HPReal sv = sin(HPReal::exact(v) / (four_pi * kk));
        direct += sv * sv;
    }
    // tail: sum_{m>=1} (-1)^{m+1} b^{2m}/(2 (2m)!) zeta_tail(2m, K)
    HPReal tail = HPReal::exact(0L);
    HPReal bpow = b * b;              // b^{2m}
    HPReal fact = HPReal::exact(2L);  // (2m)! with m=1
    Real bK = (abs(b.value()) + b.err()) / Real(K);
    for (unsigned m = 1; m < 600; ++m) {
        HPReal zt = zeta_tail(2 * m, K, tol);
        HPReal term = bpow / (HPReal::exact(2L) * fact) * zt;
        Real mag = abs(term.value()) + term.err();
        if (mag <= tol) {
            Real r = bK * bK;
            tail.widen(mag + mag * r / (1 - r));
            break;
        }
        tail += (m % 2 == 1) ? term : -term;
        bpow *= b * b;
        fact *= HPReal::exact(static_cast<long>((2 * m + 1)));
        fact *= HPReal::exact(static_cast<long>((2 * m + 2)));
    }
    return direct + tail;
}

// ---- Laguerre kernel family ------------------------------------------------

namespace {

// Szego-bound truncation index: (m-1)! e^{-(K+1)t/2}/(1-e^{-t/2}) <= tol.
unsigned long szego_truncation(unsigned m, const Real& t, const Real& tol) {
    Real ln_fact = 0;
    if (m >= 2) {
        Real f(factorial_big(m - 1));
        ln_fact = log(f);
    }
    Real one_minus_q = -boost::multiprecision::expm1(-t / 2);
    Real need = (ln_fact + log(1 / (tol * one_minus_q))) * 2 / t;
    if (need < 1) return 4;
    return need.convert_to<unsigned long>() + 4;
}

Real szego_tail(unsigned m, const Real& t, unsigned long K) {
    // (m-1)! e^{-(K+1)t/2} / (1 - e^{-t/2})
    Real q = exp(-t / 2);
    Real one_minus_q = -boost::multiprecision::expm1(-t / 2);
    return Real(factorial_big(m - 1)) * boost::multiprecision::pow(q, static_cast<long long>(K + 1))
           / one_minus_q;
}

// series: f_m(t) = (m-1)!/2 + sum_k B_{2k} (2k+m-2)!/((2k)!(2k-1)!) t^{2k-1}
// deriv:  f'_m(t) =          sum_k B_{2k} (2k+m-2)!/((2k)!(2k-2)!) t^{2k-2}
HPReal laguerre_series(unsigned m, const HPReal& t, bool deriv, const PrecisionContext& ctx) {
    const Real tol = ctx.series_tol;
    auto table = coeff_snapshot(80, ctx.internal_digits());
    long a = static_cast<long>(m);  // 2k+m-2 at k=1
    unsigned drop = deriv ? m : m - 1;
    HPReal ff = HPReal(Real(ffp_big(a, drop)));
    HPReal pw = deriv ? HPReal::exact(1L) : t;
    HPReal t2 = t * t;
    Real four_pi_sq = 4 * pi_cached() * pi_cached();
    Real rho_base = (abs(t.value()) + t.err());
    rho_base = rho_base * rho_base / four_pi_sq;
    HPReal acc = deriv ? HPReal::exact(0L)
                       : HPReal(Real(factorial_big(m - 1))) / HPReal::exact(2L);
    bool added = false;
    for (long k = 1, iter = 0; iter < 6000; ++k, ++iter) {
        if (static_cast<std::size_t>(k) >= table->size())
            table = coeff_snapshot(static_cast<std::size_t>(k) + 64, ctx.internal_digits());
        HPReal c = HPReal((*table)[static_cast<std::size_t>(k)]);
        HPReal term = c * ff * pw;
        Real mag = abs(term.value()) + term.err();
        long den1 = a + 2 - static_cast<long>(drop);
        long den2 = a + 1 - static_cast<long>(drop);
        Real rho = rho_base * Real((a + 2) * (a + 1)) / Real(den1 * den2);
        if (added && rho < Real(0.999)) {
            Real tail_bound = mag / (1 - rho);
            if (tail_bound <= tol) {
                acc.widen(tail_bound);
                return acc;
            }
        }
        acc += term;
        added = true;
        HPReal ratio = HPReal(Real((a + 2) * (a + 1))) / HPReal(Real(den1 * den2));
        ff *= ratio;
        pw *= t2;
        a += 2;
    }
    throw EvaluationError("laguerre_series: series did not truncate");
}

}  // namespace

HPReal laguerre_kernel_f(unsigned m, const Real& t, const PrecisionContext& ctx,
                         KernelPath path) {
    if (m < 1) throw std::domain_error("laguerre_kernel_f: requires m >= 1");
    if (!(t > 0)) throw std::domain_error("laguerre_kernel_f: requires t > 0");
    if (path == KernelPath::auto_select)
        path = (t < kSeriesSwitch) ? KernelPath::small_t_series : KernelPath::laguerre_sum;
    switch (path) {
        case KernelPath::small_t_series: {
            ScopedPrecision guard(ctx);
            if (!(t < 2 * pi_cached()))
                throw std::invalid_argument("laguerre_kernel_f: series requires t < 2*pi");
            return laguerre_series(m, HPReal::exact(t), false, ctx);
        }
        case KernelPath::laguerre_sum: {
            ScopedPrecision guard(ctx);
            HPReal tt = HPReal::exact(t);
            unsigned long K = szego_truncation(m, t, ctx.series_tol);
            HPReal q = exp(-tt);
            HPReal ek = q;
            HPReal acc = HPReal::exact(1L);  // k = 0 term: L_{m-1}(0) = 1
            for (unsigned long k = 1; k <= K; ++k) {
                HPReal kt = tt * HPReal::exact(static_cast<long>(k));
                auto sweep = laguerre_sweep(m - 1, kt);
                acc += ek * sweep[m - 1];
                ek *= q;
            }
            HPReal res = HPReal(Real(factorial_big(m - 1))) * acc;
            res.widen(szego_tail(m, t, K));
            return res;
        }
        case KernelPath::integral_rep: {
            if (!(t < 2 * pi_real()))
                throw std::invalid_argument("laguerre_kernel_f: integral representation requires t < 2*pi");
            return laguerre_f_via_s_integral(m, t, ctx).value;
        }
        default:
            throw std::invalid_argument("laguerre_kernel_f: unsupported representation");
    }
}

HPReal laguerre_kernel_f_prime(unsigned m, const Real& t, const PrecisionContext& ctx,
                               KernelPath path) {
    if (m < 1) throw std::domain_error("laguerre_kernel_f_prime: requires m >= 1");
    if (!(t > 0)) throw std::domain_error("laguerre_kernel_f_prime: requires t > 0");
    if (path == KernelPath::auto_select)
        path = (t < kSeriesSwitch) ? KernelPath::small_t_series : KernelPath::laguerre_sum;
    switch (path) {
        case KernelPath::small_t_series: {
            ScopedPrecision guard(ctx);
            if (!(t < 2 * pi_cached()))
                throw std::invalid_argument("laguerre_kernel_f_prime: series requires t < 2*pi");
            return laguerre_series(m, HPReal::exact(t), true, ctx);
        }
        case KernelPath::laguerre_sum: {
            ScopedPrecision guard(ctx);
            HPReal tt = HPReal::exact(t);
            // truncation for the k-weighted sum: reuse the Szego index with a
            // few extra terms, then add the exact weighted geometric tail.
            unsigned long K = szego_truncation(m, t, ctx.series_tol) + 8;
            HPReal q = exp(-tt);
            HPReal ek = q;
            HPReal acc = HPReal::exact(0L);
            HPReal mm1 = HPReal::exact(static_cast<long>(m - 1));
            for (unsigned long k = 1; k <= K; ++k) {
                HPReal kt = tt * HPReal::exact(static_cast<long>(k));
                auto sweep = laguerre_sweep(m - 1, kt);
                HPReal term = -HPReal::exact(static_cast<long>(k)) * sweep[m - 1];
                if (m >= 2) term += mm1 * (sweep[m - 1] - sweep[m - 2]) / tt;
                acc += ek * term;
                ek *= q;
            }
            HPReal res = HPReal(Real(factorial_big(m - 1))) * acc;
            // |term_k| <= e^{-kt/2} (2(m-1)/t + k); exact geometric tails
            Real q2 = exp(-t / 2);
            Real one_minus = 1 - q2;
            Real qK = boost::multiprecision::pow(q2, static_cast<long long>(K + 1));
            Real tail_flat = qK / one_minus;
            Real tail_lin = qK * (Real(K + 1) - Real(K) * q2) / (one_minus * one_minus);
            Real tail = Real(factorial_big(m - 1))
                        * (Real(2 * (m - 1)) / t * tail_flat + tail_lin);
            res.widen(tail);
            return res;
        }
        default:
            throw std::invalid_argument("laguerre_kernel_f_prime: unsupported representation");
    }
}

std::vector<HPReal> laguerre_kernel_f_batch(unsigned m_max, const Real& t,
                                            const PrecisionContext& ctx) {
    std::vector<HPReal> out;
    out.reserve(m_max);
    if (t < kSeriesSwitch) {
        ScopedPrecision guard(ctx);
        for (unsigned m = 1; m <= m_max; ++m)
            out.push_back(laguerre_series(m, HPReal::exact(t), false, ctx));
        return out;
    }
    ScopedPrecision guard(ctx);
    HPReal tt = HPReal::exact(t);
    unsigned long K = szego_truncation(m_max, t, ctx.series_tol);
    HPReal q = exp(-tt);
    HPReal ek = q;
    std::vector<HPReal> acc(m_max, HPReal::exact(1L));
    for (unsigned long k = 1; k <= K; ++k) {
        HPReal kt = tt * HPReal::exact(static_cast<long>(k));
        auto sweep = laguerre_sweep(m_max - 1, kt);
        for (unsigned m = 1; m <= m_max; ++m) acc[m - 1] += ek * sweep[m - 1];
        ek *= q;
    }
    for (unsigned m = 1; m <= m_max; ++m) {
        HPReal res = HPReal(Real(factorial_big(m - 1))) * acc[m - 1];
        res.widen(szego_tail(m, t, K));
        out.push_back(res);
    }
    return out;
}

std::vector<HPReal> laguerre_kernel_f_prime_batch(unsigned m_max, const Real& t,
                                                  const PrecisionContext& ctx) {
    std::vector<HPReal> out;
    out.reserve(m_max);
    if (t < kSeriesSwitch) {
        ScopedPrecision guard(ctx);
        for (unsigned m = 1; m <= m_max; ++m)
            out.push_back(laguerre_series(m, HPReal::exact(t), true, ctx));
        return out;
    }
    ScopedPrecision guard(ctx);
    HPReal tt = HPReal::exact(t);
    unsigned long K = szego_truncation(m_max, t, ctx.series_tol) + 8;
    HPReal q = exp(-tt);
    HPReal ek = q;
    std::vector<HPReal> acc(m_max, HPReal::exact(0L));
    for (unsigned long k = 1; k <= K; ++k) {
        HPReal kt = tt * HPReal::exact(static_cast<long>(k));
        auto sweep = laguerre_sweep(m_max - 1, kt);
        HPReal kk = HPReal::exact(static_cast<long>(k));
        for (unsigned m = 1; m <= m_max; ++m) {
            HPReal term = -kk * sweep[m - 1];
            if (m >= 2)
                term += HPReal::exact(static_cast<long>(m - 1)) * (sweep[m - 1] - sweep[m - 2]) / tt;
            acc[m - 1] += ek * term;
        }
        ek *= q;
    }
    Real q2 = exp(-t / 2);
    Real one_minus = 1 - q2;
    Real qK = boost::multiprecision::pow(q2, static_cast<long long>(K + 1));
    Real tail_flat = qK / one_minus;
    Real tail_lin = qK * (Real(K + 1) - Real(K) * q2) / (one_minus * one_minus);
    for (unsigned m = 1; m <= m_max; ++m) {
        HPReal res = HPReal(Real(factorial_big(m - 1))) * acc[m - 1];
        res.widen(Real(factorial_big(m - 1)) * (Real(2 * (m - 1)) / t * tail_flat + tail_lin));
        out.push_back(res);
    }
    return out;
}

HPReal pe_deriv(unsigned p, unsigned j, const Real& t, const PrecisionContext& ctx,
                KernelPath path) {
    if (p < 1) throw std::domain_error("pe_deriv: requires p >= 1");
    if (!(t > 0)) throw std::domain_error("pe_deriv: requires t > 0");
    if (path == KernelPath::auto_select)
        path = (t < kSeriesSwitch) ? KernelPath::small_t_series : KernelPath::laguerre_sum;
    HPReal tt = HPReal::exact(t);
    long lp = static_cast<long>(p);
    long lj = static_cast<long>(j);
    auto mono_deriv = [&](long a) -> HPReal {
        if (a >= 0 && a < lj) return HPReal::exact(0L);
        return HPReal(Real(ffp_big(a, j))) * pow_i(tt, a - lj);
    };
    if (path == KernelPath::small_t_series) {
        ScopedPrecision guard(ctx);
        if (!(t < 2 * pi_cached()))
            throw std::invalid_argument("pe_deriv: series requires t < 2*pi");
        // D^j[t^{p-1}] + D^j[t^p]/2 + sum_k B_{2k}/(2k)! ffp(2k+p-1, j) t^{2k+p-1-j}
        const Real tol = ctx.series_tol;
        auto table = coeff_snapshot(80, ctx.internal_digits());
        HPReal acc = mono_deriv(lp - 1) + mono_deriv(lp) / HPReal::exact(2L);
        long a = lp + 1;  // 2k+p-1 at k=1
        while (a < lj) a += 2;
        long k0 = (a - lp + 1) / 2;
        HPReal ff = HPReal(Real(ffp_big(a, j)));
        HPReal pw = pow_i(tt, a - lj);
        HPReal t2 = tt * tt;
        Real four_pi_sq = 4 * pi_cached() * pi_cached();
        Real rho_base = t * t / four_pi_sq;
        bool added = false;
        for (long k = k0, iter = 0; iter < 6000; ++k, ++iter) {
            if (static_cast<std::size_t>(k) >= table->size())
                table = coeff_snapshot(static_cast<std::size_t>(k) + 64, ctx.internal_digits());
            HPReal c = HPReal((*table)[static_cast<std::size_t>(k)]);
            HPReal term = c * ff * pw;
            Real mag = abs(term.value()) + term.err();
            Real rho = rho_base * Real((a + 2) * (a + 1)) / Real((a + 2 - lj) * (a + 1 - lj));
            if (added && rho < Real(0.999)) {
                Real tail_bound = mag / (1 - rho);
                if (tail_bound <= tol) {
                    acc.widen(tail_bound);
                    return acc;
                }
            }
            acc += term;
            added = true;
            HPReal ratio = HPReal(Real((a + 2) * (a + 1))) / HPReal(Real((a + 2 - lj) * (a + 1 - lj)));
            ff *= ratio;
            pw *= t2;
            a += 2;
        }
        throw EvaluationError("pe_deriv: series did not truncate");
    }
    // exponential form: D^j[t^p] + (d/dt)^j [ t^p sum_{k>=1} e^{-kt} ]
    PrecisionContext raised = ctx.with_extra_guard(15);
    ScopedPrecision guard(raised);
    return mono_deriv(lp) + exp_sum_deriv(lp, j, tt, raised.series_tol);
}

HPReal k_bound(const Real& t, unsigned m, const PrecisionContext& ctx) {
    if (!(t > 0)) throw std::domain_error("k_bound: requires t > 0");
    if (m < 1) throw std::domain_error("k_bound: requires m >= 1");
    ScopedPrecision guard(ctx);
    HPReal tt = HPReal::exact(t);
    HPReal mm = HPReal::exact(static_cast<long>(m));
    HPReal half_t = tt / HPReal::exact(2L);
    HPReal q = exp(-half_t);
    HPReal one_minus_q = -expm1(-half_t);
    HPReal sh = sinh(tt / HPReal::exact(4L));
    return mm / HPReal::exact(12L) - HPReal::exact(2L) * mm * q / (tt * one_minus_q)
           - HPReal::exact(1L) / (HPReal::exact(4L) * sh * sh);
}

}  // namespace cmdeg
