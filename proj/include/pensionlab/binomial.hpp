#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "pensionlab/errors.hpp"

namespace pensionlab {

namespace detail {

constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;

// Stirling-series remainder log(n!) - [(n+1/2)log n - n + log sqrt(2 pi)].
inline double stirling_error(std::int64_t n) {
    static const std::array<double, 16> small = [] {
        std::array<double, 16> t{};
        t[0] = 0.0;
        for (int k = 1; k < 16; ++k) {
            const long double nk = k;
            t[k] = static_cast<double>(std::lgamma(nk + 1.0L) - (nk + 0.5L) * std::log(nk) + nk -
                                       0.918938533204672741780329736406L);
        }
        return t;
    }();
    constexpr double S0 = 1.0 / 12.0;
    constexpr double S1 = 1.0 / 360.0;
    constexpr double S2 = 1.0 / 1260.0;
    constexpr double S3 = 1.0 / 1680.0;
    constexpr double S4 = 1.0 / 1188.0;
    if (n < 16) return small[static_cast<std::size_t>(n)];
    const double n1 = 1.0 / static_cast<double>(n);
    const double n2 = n1 * n1;
    if (n > 500) return (S0 - S1 * n2) * n1;
    if (n > 80) return (S0 - (S1 - S2 * n2) * n2) * n1;
    if (n > 35) return (S0 - (S1 - (S2 - S3 * n2) * n2) * n2) * n1;
    return (S0 - (S1 - (S2 - (S3 - S4 * n2) * n2) * n2) * n2) * n1;
}

// Deviance term x log(x/np) + np - x, evaluated by series near x = np.
inline double binomial_deviance(double x, double np) {
    if (std::abs(x - np) < 0.1 * (x + np)) {
        const double v = (x - np) / (x + np);
        double s = (x - np) * v;
        double ej = 2.0 * x * v;
        for (int j = 1; j < 1000; ++j) {
            ej *= v * v;
            const double s1 = s + ej / (2 * j + 1);
            if (s1 == s) return s1;
            s = s1;
        }
        return s;
    }
    return x * std::log(x / np) + np - x;
}

}  // namespace detail

/// log of C(n,i) s^i (1-s)^(n-i), using Loader's saddle-point expansion so
/// that large n neither overflows nor loses relative accuracy.
/// Returns -infinity for impossible outcomes (s = 0 or 1 at the boundary).
inline double log_binomial_pmf(std::int64_t n, std::int64_t i, double s) {
    if (n < 0 || i < 0 || i > n)
        throw DomainError("binomial: need 0 <= i <= n");
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("binomial: probability outside [0,1]");
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    if (s == 0.0) return i == 0 ? 0.0 : kNegInf;
    if (s == 1.0) return i == n ? 0.0 : kNegInf;
    const double q = 1.0 - s;
    const double nd = static_cast<double>(n);
    if (i == 0) return nd * std::log1p(-s);
    if (i == n) return nd * std::log(s);
    const double id = static_cast<double>(i);
    const double jd = nd - id;
    const double lc = detail::stirling_error(n) - detail::stirling_error(i) -
                      detail::stirling_error(n - i) - detail::binomial_deviance(id, nd * s) -
                      detail::binomial_deviance(jd, nd * q);
    return lc + 0.5 * std::log(nd / (id * jd)) - detail::kLogSqrt2Pi;
}

/// Probability that i of n independent members survive one step when each
/// survives with probability s.
inline double binomial_transition(std::int64_t n, std::int64_t i, double s) {
    return std::exp(log_binomial_pmf(n, i, s));
}

}  // namespace pensionlab
