#pragma once

#include "cmdeg/hp_real.hpp"
#include "cmdeg/precision.hpp"

#include <vector>

namespace cmdeg {

enum class KernelFamily { binet_f, binet_g, laguerre_f, s_kernel };

enum class KernelPath { auto_select, small_t_series, laguerre_sum, integral_rep };

/// Identifies a Laplace-transform kernel: family, index (n for the Binet
/// family, m for the Laguerre family), derivative order, and preferred
/// representation.
struct KernelSpec {
    KernelFamily family = KernelFamily::binet_g;
    unsigned index = 0;
    unsigned deriv_order = 0;
    KernelPath representation = KernelPath::auto_select;
};

// ---- Binet-type kernels -------------------------------------------------
//
// g_n(t) = (-1)^n (1/t^2 - coth(t/2)/(2t) + sum_{k=1}^{n+1} B_{2k}/(2k)! t^{2k-2})
// f_n(t) = t * g_n(t)
//
// Two representations with certified truncation error:
//   * t below the series switch: the cancellation-free Bernoulli tail series
//     g_n(t) = (-1)^{n+1} sum_{j>=n+2} B_{2j}/(2j)! t^{2j-2};
//   * larger t: the exponential form obtained from
//     coth(t/2)/(2t) = 1/(2t) + (1/t) sum_{k>=1} e^{-kt}.

HPReal binet_f(unsigned n, const Real& t, const PrecisionContext& ctx);
HPReal binet_g(unsigned n, const Real& t, const PrecisionContext& ctx);

/// j-th derivative of g_n; j <= 2n+2. integral_rep delegates to the
/// oscillatory quadrature representation (j = 2n or 2n+1 only).
HPReal binet_g_deriv(unsigned n, unsigned j, const Real& t, const PrecisionContext& ctx,
                     KernelPath path = KernelPath::auto_select);

/// Direct coth-based closed form of f_n (raised precision); cross-check path.
HPReal binet_f_closed(unsigned n, const Real& t, const PrecisionContext& ctx);

/// Core engine: (d/dt)^j [ t^w * g_n(t) ].  n = -1 is admitted — g_{-1} is
/// the Binet kernel of R_0 (empty correction sum).  The weighted kernels are
/// exactly the Laplace kernels of x^w-weighted remainder derivatives, which
/// is what the degree scans evaluate.
HPReal g_weighted_deriv(int n, unsigned w, unsigned j, const Real& t,
                        const PrecisionContext& ctx,
                        KernelPath path = KernelPath::auto_select);

/// Large-t positivity certificate for (t^w g_n)^{(j)}: returns a certified
/// positive lower bound valid for all t >= T, or an empty HPReal bound
/// (certainly_positive() == false) when the dominance argument does not
/// apply. Used to extend grid scans past the last grid point.
HPReal g_weighted_tail_lower_bound(int n, unsigned w, unsigned j, const Real& T,
                                   const PrecisionContext& ctx);

// ---- sine-series kernel -------------------------------------------------

/// s(t) = 1/2 + (1/pi) sum_{k>=1} sin(t/(2 k pi))/k
HPReal s_kernel(const Real& t, const PrecisionContext& ctx);

/// s'(t) = (1/(2 pi^2)) sum_{k>=1} cos(t/(2 k pi))/k^2
HPReal s_kernel_prime(const Real& t, const PrecisionContext& ctx);

/// sum_{k>=1} sin^2(v/(4 k pi)) — the integrand core of the sin^2 identity.
HPReal sin2_sum(const Real& v, const PrecisionContext& ctx);

// ---- Laguerre kernel family ----------------------------------------------
//
// f_m(t) = (d/dt)^{m-1} [ t^{m-1} / (1 - e^{-t}) ]
//        = (m-1)! sum_{k>=0} e^{-kt} L_{m-1}(kt)          (Laguerre sum)
//        = (m-1)!/2 + sum_{k>=1} B_{2k} (2k+m-2)!/((2k)!(2k-1)!) t^{2k-1}
//          (series, |t| < 2 pi)

HPReal laguerre_kernel_f(unsigned m, const Real& t, const PrecisionContext& ctx,
                         KernelPath path = KernelPath::auto_select);
HPReal laguerre_kernel_f_prime(unsigned m, const Real& t, const PrecisionContext& ctx,
                               KernelPath path = KernelPath::auto_select);

/// f_1..f_{m_max} (resp. f'_1..f'_{m_max}) at one t, sharing the e^{-kt}
/// factors and Laguerre recurrence sweeps. Index 0 of the result is m=1.
std::vector<HPReal> laguerre_kernel_f_batch(unsigned m_max, const Real& t,
                                            const PrecisionContext& ctx);
std::vector<HPReal> laguerre_kernel_f_prime_batch(unsigned m_max, const Real& t,
                                                  const PrecisionContext& ctx);

/// (d/dt)^j [ t^p / (1 - e^{-t}) ] for p >= 1 — the raw form behind f_m and
/// the partial-integral identity's right-hand side.
HPReal pe_deriv(unsigned p, unsigned j, const Real& t, const PrecisionContext& ctx,
                KernelPath path = KernelPath::auto_select);

// ---- bound function -------------------------------------------------------

/// K(t,m) = m/12 - 2m e^{-t/2}/(t(1-e^{-t/2})) - 1/(4 sinh^2(t/4))
HPReal k_bound(const Real& t, unsigned m, const PrecisionContext& ctx);

}  // namespace cmdeg
