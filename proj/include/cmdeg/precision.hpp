#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <stdexcept>

namespace cmdeg {

/// Arbitrary-precision real with runtime-selectable precision (MPFR-backed).
using Real = boost::multiprecision::mpfr_float;

/// Working precision plus the series/quadrature tolerances threaded through
/// every numeric call. workingDigits is the number of decimal digits the
/// caller wants certified; computations run with guard digits on top.
struct PrecisionContext {
    int working_digits = 50;
    int guard_digits = 15;
    Real series_tol;  // absolute truncation target for series tails
    Real quad_tol;    // convergence certificate target for quadrature

    explicit PrecisionContext(int digits = 50, int guard = 15)
        : working_digits(digits), guard_digits(guard) {
        if (digits < 20)
            throw std::invalid_argument("PrecisionContext: workingDigits must be >= 20");
        if (guard < 5)
            throw std::invalid_argument("PrecisionContext: guard digits must be >= 5");
        series_tol = default_tol();
        quad_tol = default_tol();
    }

    int internal_digits() const { return working_digits + guard_digits; }

    // Tolerances must not be looser than 10^-(workingDigits-10).
    void set_series_tol(const Real& tol) {
        if (tol <= 0 || tol > max_tol())
            throw std::invalid_argument("PrecisionContext: seriesTol out of range");
        series_tol = tol;
    }
    void set_quad_tol(const Real& tol) {
        if (tol <= 0 || tol > max_tol())
            throw std::invalid_argument("PrecisionContext: quadTol out of range");
        quad_tol = tol;
    }

    /// Same context with extra guard digits (used where a closed form is
    /// known to cancel a predictable number of digits).
    PrecisionContext with_extra_guard(int extra) const {
        PrecisionContext c(working_digits, guard_digits + extra);
        c.series_tol = series_tol;
        c.quad_tol = quad_tol;
        return c;
    }

  private:
    Real default_tol() const {
        return boost::multiprecision::pow(Real(10), -(working_digits + 8));
    }
    Real max_tol() const {
        return boost::multiprecision::pow(Real(10), -(working_digits - 10));
    }
};

/// RAII guard: sets the thread's default mpfr precision for the scope.
class ScopedPrecision {
  public:
    explicit ScopedPrecision(int decimal_digits)
        : saved_(static_cast<int>(Real::default_precision())) {
        Real::default_precision(decimal_digits);
    }
    explicit ScopedPrecision(const PrecisionContext& ctx)
        : ScopedPrecision(ctx.internal_digits()) {}
    ~ScopedPrecision() { Real::default_precision(saved_); }
    ScopedPrecision(const ScopedPrecision&) = delete;
    ScopedPrecision& operator=(const ScopedPrecision&) = delete;

  private:
    int saved_;
};

}  // namespace cmdeg
