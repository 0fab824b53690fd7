#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>

#include "pensionlab/errors.hpp"

namespace pensionlab {

/// Consumption dates t0, t0+dt, ..., T-dt. Death is certain by T, which is
/// not itself a consumption date. Dates are addressed by step index; real
/// times are produced only on request.
class TimeGrid {
public:
    TimeGrid() = default;

    double t0() const noexcept { return t0_; }
    double dt() const noexcept { return dt_; }
    double horizon() const noexcept { return t0_ + dt_ * static_cast<double>(steps_); }
    std::size_t size() const noexcept { return steps_; }
    std::size_t last() const noexcept { return steps_ - 1; }
    bool is_last(std::size_t k) const noexcept { return k + 1 == steps_; }

    double time(std::size_t k) const noexcept { return t0_ + dt_ * static_cast<double>(k); }
    /// Elapsed time t_k - t0.
    double elapsed(std::size_t k) const noexcept { return dt_ * static_cast<double>(k); }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    friend TimeGrid make_time_grid(double t0, double dt, double T);
    TimeGrid(double t0, double dt, std::size_t steps) : t0_(t0), dt_(dt), steps_(steps) {}

    double t0_ = 0.0;
    double dt_ = 1.0;
    std::size_t steps_ = 1;
};

inline TimeGrid make_time_grid(double t0, double dt, double T) {
    if (!std::isfinite(t0) || !std::isfinite(dt) || !std::isfinite(T))
        throw ConfigError("grid: t0, dt and T must be finite");
    if (!(dt > 0.0)) throw ConfigError("grid: dt must be positive");
    const double ratio = (T - t0) / dt;
    const double steps = std::round(ratio);
    if (std::abs(ratio - steps) > 1e-9 || steps < 1.0)
        throw ConfigError("grid: (T - t0)/dt = " + std::to_string(ratio) +
                          " is not a positive integer");
    return TimeGrid(t0, dt, static_cast<std::size_t>(steps));
}

struct MarketParams {
    double mu = 0.0;     ///< stock drift per year
    double r = 0.0;      ///< risk-free rate per year
    double sigma = 0.0;  ///< stock volatility per sqrt(year)

    void validate() const {
        if (!std::isfinite(mu)) throw ConfigError("market.mu must be finite");
        if (!std::isfinite(r)) throw ConfigError("market.r must be finite");
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw ConfigError("market.sigma must be positive");
    }
};

/// Homogeneous Epstein-Zin parameters. alpha governs risk aversion over
/// wealth gambles, rho governs intertemporal substitution, and beta is the
/// per-step discount factor exp(-b*dt).
struct Preferences {
    double alpha = -1.0;
    double rho = -1.0;
    double b = 0.0;
    double beta = 1.0;

    bool is_von_neumann_morgenstern() const noexcept { return alpha == rho; }
};

inline Preferences make_preferences(double alpha, double rho, double b, double dt) {
    if (!std::isfinite(alpha) || alpha == 0.0 || alpha >= 1.0)
        throw ConfigError("preferences.alpha must lie in (-inf,1) excluding 0");
    if (!std::isfinite(rho) || rho == 0.0 || rho >= 1.0)
        throw ConfigError("preferences.rho must lie in (-inf,1) excluding 0");
    if (!std::isfinite(b) || b < 0.0) throw ConfigError("preferences.b must be >= 0");
    if (!(dt > 0.0)) throw ConfigError("preferences: dt must be positive");
    const double beta = std::exp(-b * dt);
    if (!(beta > 0.0)) throw ConfigError("preferences: discount factor underflows to zero");
    return Preferences{alpha, rho, b, beta};
}

/// Non-negative reals extended by symbolic infinitesimals eps^k (k != 0).
/// eps^k with k > 0 is infinitesimal, with k < 0 infinite.
class ExtendedPositiveReal {
public:
    static ExtendedPositiveReal finite(double x) {
        if (!(x >= 0.0) || !std::isfinite(x))
            throw DomainError("extended real: finite part must be a non-negative real");
        return ExtendedPositiveReal(false, x);
    }
    static ExtendedPositiveReal eps(double exponent) {
        if (exponent == 0.0 || !std::isfinite(exponent))
            throw DomainError("extended real: eps exponent must be finite and nonzero");
        return ExtendedPositiveReal(true, exponent);
    }

    bool is_eps() const noexcept { return is_eps_; }
    bool is_finite() const noexcept { return !is_eps_; }
    double value() const {
        if (is_eps_) throw DomainError("extended real: eps power has no real value");
        return v_;
    }
    double exponent() const {
        if (!is_eps_) throw DomainError("extended real: finite value has no eps exponent");
        return v_;
    }

    friend ExtendedPositiveReal operator+(const ExtendedPositiveReal& a,
                                          const ExtendedPositiveReal& b) {
        if (a.is_finite() && b.is_finite()) return finite(a.v_ + b.v_);
        if (a.is_eps() && b.is_eps()) return eps(std::min(a.v_, b.v_));
        const auto& x = a.is_finite() ? a : b;
        const auto& e = a.is_finite() ? b : a;
        return e.v_ > 0.0 ? x : e;
    }

    friend ExtendedPositiveReal operator*(const ExtendedPositiveReal& a,
                                          const ExtendedPositiveReal& b) {
        if (a.is_finite() && b.is_finite()) return finite(a.v_ * b.v_);
        if (a.is_eps() && b.is_eps()) {
            const double k = a.v_ + b.v_;
            if (k == 0.0)
                throw DomainError("extended real: eps^a * eps^-a is undefined");
            return eps(k);
        }
        const auto& x = a.is_finite() ? a : b;
        const auto& e = a.is_finite() ? b : a;
        if (x.v_ == 0.0) throw DomainError("extended real: 0 * eps^a is undefined");
        return e;
    }

    friend bool operator==(const ExtendedPositiveReal&, const ExtendedPositiveReal&) = default;

    friend std::ostream& operator<<(std::ostream& os, const ExtendedPositiveReal& a) {
        if (a.is_eps()) return os << "eps^" << a.v_;
        return os << a.v_;
    }

private:
    ExtendedPositiveReal(bool is_eps, double v) : is_eps_(is_eps), v_(v) {}

    bool is_eps_ = false;
    double v_ = 0.0;
};

inline ExtendedPositiveReal pow(const ExtendedPositiveReal& a, double p) {
    if (!std::isfinite(p)) throw DomainError("extended real: power must be finite");
    if (a.is_eps()) {
        if (p == 0.0) throw DomainError("extended real: (eps^a)^0 is undefined");
        return ExtendedPositiveReal::eps(a.exponent() * p);
    }
    if (a.value() == 0.0 && p < 0.0)
        throw DomainError("extended real: 0 raised to a negative power");
    return ExtendedPositiveReal::finite(std::pow(a.value(), p));
}

}  // namespace pensionlab
