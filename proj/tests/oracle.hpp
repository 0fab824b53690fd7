#pragma once

// Brute-force reference for the finite-fund value: recursion over the
// survivor tree seen from one member, with the stock proportion and every
// consumption rate found by golden-section search. Shares no algebra with
// the production solver.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include <boost/math/quadrature/sinh_sinh.hpp>

namespace oracle {

struct Problem {
    std::vector<double> s;  // one-step survival per grid point, last entry unused
    double dt = 1.0;
    double mu = 0.0;
    double r = 0.0;
    double sigma = 0.1;
    double alpha = -1.0;
    double rho = -1.0;
    double beta = 1.0;
};

inline double golden_max(const std::function<double(double)>& f, double lo, double hi,
                         double tol = 1e-11) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

// (E[G^alpha])^(1/alpha) for one period's gross return with proportion a.
inline double certainty_equivalent(const Problem& p, double a) {
    const double m = (a * (p.mu - p.r) + p.r - 0.5 * a * a * p.sigma * p.sigma) * p.dt;
    const double v = a * p.sigma * std::sqrt(p.dt);
    boost::math::quadrature::sinh_sinh<double> integrator;
    const double pi = 3.14159265358979323846;
    const auto integrand = [&](double z) {
        return std::exp(p.alpha * (m + v * z) - 0.5 * z * z) / std::sqrt(2.0 * pi);
    };
    const double moment = integrator.integrate(integrand, 1e-14);
    return std::pow(moment, 1.0 / p.alpha);
}

inline double best_growth(const Problem& p) {
    const double a = golden_max([&](double x) { return certainty_equivalent(p, x); }, -5.0, 5.0);
    return certainty_equivalent(p, a);
}

inline double choose(int n, int k) {
    double c = 1.0;
    for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
    return c;
}

// Utility per unit wealth of a member at grid point k in a fund of i
// survivors, under optimal behaviour from k onwards.
inline double value(const Problem& p, double growth, std::size_t k, int i) {
    if (k + 1 == p.s.size()) return 1.0;
    const double s = p.s[k];
    // the member survives with probability s; the other i-1 independently
    double moment = 0.0;
    for (int m = 0; m <= i - 1; ++m) {
        const double w = choose(i - 1, m) * std::pow(s, m) * std::pow(1.0 - s, i - 1 - m);
        if (w == 0.0) continue;
        const int j = m + 1;
        const double share = static_cast<double>(i) / j;
        moment += w * std::pow(share * value(p, growth, k + 1, j), p.alpha);
    }
    const double next = std::pow(s * moment, 1.0 / p.alpha);
    const auto utility = [&](double c) {
        return std::pow(std::pow(c, p.rho) + p.beta * std::pow((1.0 - c) * growth * next, p.rho),
                        1.0 / p.rho);
    };
    const double c = golden_max(utility, 1e-12, 1.0 - 1e-12);
    return utility(c);
}

inline double value(const Problem& p, int n) { return value(p, best_growth(p), 0, n); }

}  // namespace oracle
