/// \file logreal.hpp
/// \brief Signed log-magnitude arithmetic for schedule ledgers.
///
/// Schedule quantities such as pairing^(g/32) underflow binary64 by hundreds
/// of orders of magnitude; every ledger inequality is therefore evaluated on
/// (sign, natural-log-magnitude) pairs.  Multiplication and powers are exact
/// up to one rounding; addition uses log-sum-exp and is accurate whenever the
/// summands are not catastrophically cancelling (the verifier avoids such
/// subtractions by using closed-form margins instead).

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace oscillab {

/// A real number stored as sign ∈ {-1,0,+1} and ln|x|.
struct LogReal {
    int sign = 0;
    double lg = -std::numeric_limits<double>::infinity(); ///< ln|x|; -inf for 0

    LogReal() = default;
    LogReal(int s, double l) : sign(s), lg(l) {
        if (s == 0) lg = -std::numeric_limits<double>::infinity();
    }

    static LogReal zero() { return LogReal(); }
    static LogReal one() { return LogReal(1, 0.0); }

    static LogReal from_double(double x) {
        if (x == 0.0) return zero();
        return LogReal(x > 0 ? 1 : -1, std::log(std::fabs(x)));
    }

    /// Positive value from its natural log (never zero).
    static LogReal from_log(double lnx) { return LogReal(1, lnx); }

    /// Saturating conversion (overflows to ±inf, underflows to ±0).
    double to_double() const {
        if (sign == 0) return 0.0;
        return sign * std::exp(lg);
    }

    bool is_zero() const { return sign == 0; }

    LogReal operator*(const LogReal& o) const {
        if (sign == 0 || o.sign == 0) return zero();
        return LogReal(sign * o.sign, lg + o.lg);
    }
    LogReal operator/(const LogReal& o) const {
        if (o.sign == 0) throw std::domain_error("LogReal: division by zero");
        if (sign == 0) return zero();
        return LogReal(sign * o.sign, lg - o.lg);
    }
    LogReal operator-() const { return LogReal(-sign, lg); }

    /// |x|^p (requires sign >= 0 unless p is integral).
    LogReal pow(double p) const {
        if (sign == 0) return p == 0.0 ? one() : zero();
        if (sign < 0) throw std::domain_error("LogReal: pow of negative base");
        return LogReal(1, lg * p);
    }

    LogReal abs() const { return LogReal(sign == 0 ? 0 : 1, lg); }

    /// Addition in log space.  Cancellation between nearly equal opposite
    /// values loses precision like any floating subtraction; callers that
    /// need tiny differences must compute them in closed form.
    LogReal operator+(const LogReal& o) const {
        if (sign == 0) return o;
        if (o.sign == 0) return *this;
        const LogReal *big = this, *small = &o;
        if (o.lg > lg) { big = &o; small = this; }
        const double d = small->lg - big->lg; // <= 0
        if (sign == o.sign) {
            return LogReal(sign, big->lg + std::log1p(std::exp(d)));
        }
        const double m = 1.0 - std::exp(d);
        if (m <= 0.0) return zero(); // exact cancellation at this precision
        return LogReal(big->sign, big->lg + std::log(m));
    }
    LogReal operator-(const LogReal& o) const { return *this + (-o); }

    /// Numeric comparison (not lexicographic).
    bool operator<(const LogReal& o) const {
        if (sign != o.sign) return sign < o.sign;
        if (sign == 0) return false;
        return sign > 0 ? lg < o.lg : lg > o.lg;
    }
    bool operator>(const LogReal& o) const { return o < *this; }
};

} // namespace oscillab
