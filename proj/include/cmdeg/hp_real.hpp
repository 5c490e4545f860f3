#pragma once

#include "cmdeg/precision.hpp"

#include <stdexcept>
#include <string>

namespace cmdeg {

/// Thrown when an evaluation cannot certify its result (division by an
/// interval containing zero, log of a possibly-nonpositive value, ...).
class EvaluationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Arbitrary-precision value paired with a propagated absolute error bound.
/// Every operation widens the bound by the exact first-order propagation rule
/// plus a rounding allowance of a few ulp at the current working precision;
/// the bound never shrinks below what propagation dictates.
class HPReal {
  public:
    HPReal() : v_(0), e_(0) {}
    HPReal(const Real& v) : v_(v), e_(rounding_slack(v)) {}
    HPReal(Real&& v) : v_(std::move(v)), e_(rounding_slack(v_)) {}
    HPReal(int v) : v_(v), e_(0) {}
    HPReal(long v) : v_(v), e_(0) {}
    HPReal(unsigned long v) : v_(v), e_(0) {}
    HPReal(const Real& v, const Real& e) : v_(v), e_(e) {
        if (e_ < 0) throw std::invalid_argument("HPReal: negative error bound");
    }
    /// Exact value: no representation or rounding error.
    static HPReal exact(const Real& v) { return HPReal(v, Real(0)); }
    static HPReal exact(long v) { return HPReal(Real(v), Real(0)); }

    const Real& value() const { return v_; }
    const Real& err() const { return e_; }

    HPReal& widen(const Real& extra) {
        e_ += extra;
        return *this;
    }

    bool certainly_positive() const { return v_ - e_ > 0; }
    bool certainly_negative() const { return v_ + e_ < 0; }
    /// value - err >= c
    bool certainly_ge(const Real& c) const { return v_ - e_ >= c; }
    /// value + err <= c
    bool certainly_le(const Real& c) const { return v_ + e_ <= c; }

    HPReal operator-() const { return HPReal(-v_, e_); }

    friend HPReal operator+(const HPReal& a, const HPReal& b) {
        Real v = a.v_ + b.v_;
        Real e = a.e_ + b.e_ + rounding_slack(v);
        return HPReal(std::move(v), std::move(e));
    }
    friend HPReal operator-(const HPReal& a, const HPReal& b) {
        Real v = a.v_ - b.v_;
        Real e = a.e_ + b.e_ + rounding_slack(v);
        return HPReal(std::move(v), std::move(e));
    }
    friend HPReal operator*(const HPReal& a, const HPReal& b) {
        Real v = a.v_ * b.v_;
        Real e = abs(a.v_) * b.e_ + abs(b.v_) * a.e_ + a.e_ * b.e_ + rounding_slack(v);
        return HPReal(std::move(v), std::move(e));
    }
    friend HPReal operator/(const HPReal& a, const HPReal& b) {
        Real babs = abs(b.v_);
        if (!(babs > b.e_))
            throw EvaluationError("HPReal: division by interval containing zero");
        Real v = a.v_ / b.v_;
        Real e = (a.e_ + abs(v) * b.e_) / (babs - b.e_) + rounding_slack(v);
        return HPReal(std::move(v), std::move(e));
    }
    HPReal& operator+=(const HPReal& o) { return *this = *this + o; }
    HPReal& operator-=(const HPReal& o) { return *this = *this - o; }
    HPReal& operator*=(const HPReal& o) { return *this = *this * o; }
    HPReal& operator/=(const HPReal& o) { return *this = *this / o; }

    // Comparisons act on the central values.
    friend bool operator<(const HPReal& a, const HPReal& b) { return a.v_ < b.v_; }
    friend bool operator>(const HPReal& a, const HPReal& b) { return a.v_ > b.v_; }

    /// A few ulp of |v| at the precision v carries.
    static Real rounding_slack(const Real& v) {
        if (v == 0) return Real(0);
        long bits = static_cast<long>(mpfr_get_prec(v.backend().data()));
        Real s = abs(v);
        // 2^(4-bits): 16 ulp, coarse but cheap and always an upper bound.
        return boost::multiprecision::ldexp(s, static_cast<int>(4 - bits));
    }

    std::string str(int digits) const {
        return v_.str(digits, std::ios_base::scientific);
    }

  private:
    Real v_;
    Real e_;
};

// Elementary functions with certified propagation. Arguments whose domain is
// restricted throw EvaluationError when the interval leaves the domain.

inline HPReal exp(const HPReal& a) {
    Real v = boost::multiprecision::exp(a.value());
    Real e = v * boost::multiprecision::expm1(a.err()) + HPReal::rounding_slack(v);
    return HPReal(std::move(v), std::move(e));
}

inline HPReal expm1(const HPReal& a) {
    Real v = boost::multiprecision::expm1(a.value());
    Real grow = boost::multiprecision::exp(a.value() + a.err());
    Real e = grow * a.err() + HPReal::rounding_slack(v);
    return HPReal(std::move(v), std::move(e));
}

inline HPReal log(const HPReal& a) {
    if (!(a.value() > a.err()))
        throw EvaluationError("HPReal: log of interval reaching 0");
    Real v = boost::multiprecision::log(a.value());
    Real e = a.err() / (a.value() - a.err()) + HPReal::rounding_slack(v);
    return HPReal(std::move(v), std::move(e));
}

inline HPReal log1p(const HPReal& a) {
    if (!(a.value() + 1 > a.err()))
        throw EvaluationError("HPReal: log1p of interval reaching -1");
    Real v = boost::multiprecision::log1p(a.value());
    Real e = a.err() / (a.value() + 1 - a.err()) + HPReal::rounding_slack(v);
    return HPReal(std::move(v), std::move(e));
}

inline HPReal sin(const HPReal& a) {
    Real v = boost::multiprecision::sin(a.value());
    Real e = a.err() + HPReal::rounding_slack(Real(1));
    return HPReal(std::move(v), std::move(e));
}

inline HPReal cos(const HPReal& a) {
    Real v = boost::multiprecision::cos(a.value());
    Real e = a.err() + HPReal::rounding_slack(Real(1));
    return HPReal(std::move(v), std::move(e));
}

inline HPReal sqrt(const HPReal& a) {
    if (!(a.value() > a.err()))
        throw EvaluationError("HPReal: sqrt of interval reaching 0");
    Real v = boost::multiprecision::sqrt(a.value());
    Real e = a.err() / (2 * boost::multiprecision::sqrt(a.value() - a.err()))
             + HPReal::rounding_slack(v);
    return HPReal(std::move(v), std::move(e));
}

inline HPReal abs(const HPReal& a) {
    return HPReal(boost::multiprecision::abs(a.value()), a.err());
}

/// Integer power by binary exponentiation (propagation via multiplication).
inline HPReal pow_i(const HPReal& base, long k) {
    if (k == 0) return HPReal::exact(1L);
    bool inv = k < 0;
    unsigned long n = inv ? static_cast<unsigned long>(-k) : static_cast<unsigned long>(k);
    HPReal acc = HPReal::exact(1L);
    HPReal b = base;
    while (n) {
        if (n & 1UL) acc *= b;
        n >>= 1UL;
        if (n) b *= b;
    }
    if (inv) return HPReal::exact(1L) / acc;
    return acc;
}

inline HPReal sinh(const HPReal& a) {
    // (e^x - e^-x)/2 via expm1 for stability near 0.
    HPReal em = expm1(a);
    HPReal ep = expm1(-a);
    return (em - ep) / HPReal::exact(2L);
}

inline HPReal cosh(const HPReal& a) {
    HPReal ex = exp(a);
    return (ex + HPReal::exact(1L) / ex) / HPReal::exact(2L);
}

/// coth(x) for x > 0: 1 + 2/(e^{2x}-1), stable for small x.
inline HPReal coth_pos(const HPReal& a) {
    if (!(a.value() > a.err()))
        throw EvaluationError("HPReal: coth_pos requires x > 0");
    return HPReal::exact(1L) + HPReal::exact(2L) / expm1(HPReal::exact(2L) * a);
}

inline Real pi_real() {
    Real p;
    mpfr_const_pi(p.backend().data(), MPFR_RNDN);
    return p;
}

inline HPReal pi_hp() { return HPReal(pi_real()); }

inline HPReal log_real(const Real& x) { return log(HPReal(x)); }

}  // namespace cmdeg
