#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pensionlab/binomial.hpp"
#include "pensionlab/core.hpp"
#include "pensionlab/errors.hpp"
#include "pensionlab/mortality.hpp"

namespace pensionlab {

/// Largest fund size the finite-n recursion accepts; cost is O(n^2) per step.
inline constexpr std::size_t kMaxFundSize = 10000;

enum class CollectiveKind { Individual, Infinite, Finite };

class CollectiveMode {
public:
    static CollectiveMode individual() { return CollectiveMode(CollectiveKind::Individual, 1); }
    static CollectiveMode infinite() { return CollectiveMode(CollectiveKind::Infinite, 0); }
    static CollectiveMode finite(std::size_t n) {
        if (n < 1) throw ConfigError("mode: finite fund size must be at least 1");
        if (n > kMaxFundSize)
            throw ConfigError("mode: finite fund size " + std::to_string(n) + " exceeds the cap of " +
                              std::to_string(kMaxFundSize));
        return CollectiveMode(CollectiveKind::Finite, n);
    }

    CollectiveKind kind() const noexcept { return kind_; }
    bool is_finite() const noexcept { return kind_ == CollectiveKind::Finite; }
    /// Fund size; 1 for the individual problem, 0 for the infinite fund.
    std::size_t n() const noexcept { return n_; }
    /// 0 for the individual problem, 1 for the infinite fund. Finite funds
    /// have no such exponent.
    int collective_flag() const {
        if (kind_ == CollectiveKind::Finite)
            throw DomainError("mode: a finite fund has no collective flag");
        return kind_ == CollectiveKind::Infinite ? 1 : 0;
    }
    /// Number of survivor-count rows in a value table for this mode.
    std::size_t rows() const noexcept { return is_finite() ? n_ : 1; }

    std::string label() const {
        switch (kind_) {
            case CollectiveKind::Individual: return "individual";
            case CollectiveKind::Infinite: return "infinite";
            case CollectiveKind::Finite: return "finite:" + std::to_string(n_);
        }
        return {};
    }

    friend bool operator==(const CollectiveMode&, const CollectiveMode&) = default;

private:
    CollectiveMode(CollectiveKind kind, std::size_t n) : kind_(kind), n_(n) {}

    CollectiveKind kind_;
    std::size_t n_;
};

/// Certainty-equivalent growth rate per year of a constant-mix portfolio
/// holding proportion a in stock, for a wealth-power moment of order alpha.
inline double portfolio_growth(const MarketParams& m, double a, double alpha) {
    return a * (m.mu - m.r) + m.r - 0.5 * a * a * (1.0 - alpha) * m.sigma * m.sigma;
}

/// Merton proportion (mu - r) / ((1 - alpha) sigma^2). Independent of time,
/// wealth and rho.
inline double optimal_proportion(const MarketParams& m, double alpha) {
    return (m.mu - m.r) / ((1.0 - alpha) * m.sigma * m.sigma);
}

/// xi: the growth rate at the optimal proportion.
inline double growth_exponent(const MarketParams& m, double alpha) {
    return portfolio_growth(m, optimal_proportion(m, alpha), alpha);
}

/// Drift of log wealth under the optimal proportion, i.e. xi with alpha set
/// to zero in the quadratic while keeping a* fixed.
inline double log_wealth_drift(const MarketParams& m, double alpha) {
    return portfolio_growth(m, optimal_proportion(m, alpha), 0.0);
}

inline double log_phi(const Preferences& prefs, const MarketParams& m, double dt, double s,
                      int collective_flag) {
    if (!(s > 0.0 && s <= 1.0)) throw DomainError("phi: survival probability must lie in (0,1]");
    return std::log(prefs.beta) / prefs.rho + growth_exponent(m, prefs.alpha) * dt +
           (1.0 / prefs.alpha - collective_flag) * std::log(s);
}

/// One-step value multiplier beta^(1/rho) e^(xi dt) s^(1/alpha - C), defined
/// for the non-final grid points only.
inline double phi(const Preferences& prefs, const MarketParams& m, double dt, double s,
                  int collective_flag) {
    return std::exp(log_phi(prefs, m, dt, s, collective_flag));
}

inline double consumption_rate(double z, double rho) { return std::pow(z, rho / (rho - 1.0)); }

/// Optimal utility per unit wealth z, the transformed value y = z^(rho/(1-rho))
/// and the optimal consumption rate c* = 1/y, by grid point and survivor count.
class ValueTable {
public:
    ValueTable(CollectiveMode mode, TimeGrid grid, double astar, double xi)
        : mode_(mode), grid_(grid), astar_(astar), xi_(xi),
          z_(mode.rows() * grid.size()), y_(z_.size()), c_(z_.size()) {}

    const CollectiveMode& mode() const noexcept { return mode_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    double astar() const noexcept { return astar_; }
    double xi() const noexcept { return xi_; }

    /// Survivor labels for the rows: 1..n for a finite fund, a single row 0 otherwise.
    std::size_t first_survivor_label() const noexcept { return mode_.is_finite() ? 1 : 0; }
    std::size_t last_survivor_label() const noexcept { return mode_.is_finite() ? mode_.n() : 0; }

    double z(std::size_t k, std::size_t i = 0) const { return z_[at(k, i)]; }
    double y(std::size_t k, std::size_t i = 0) const { return y_[at(k, i)]; }
    double cstar(std::size_t k, std::size_t i = 0) const { return c_[at(k, i)]; }
    /// z at t0 for the full fund.
    double z0() const { return z(0, last_survivor_label()); }

    void set(std::size_t k, std::size_t i, double z, double y, double c) {
        const auto idx = at(k, i);
        z_[idx] = z;
        y_[idx] = y;
        c_[idx] = c;
    }

private:
    std::size_t at(std::size_t k, std::size_t i) const {
        if (k >= grid_.size()) throw DomainError("value table: grid index out of range");
        std::size_t row = 0;
        if (mode_.is_finite()) {
            if (i < 1 || i > mode_.n()) throw DomainError("value table: survivor count out of range");
            row = i - 1;
        } else if (i != 0) {
            throw DomainError("value table: survivor label must be 0 for this mode");
        }
        return row * grid_.size() + k;
    }

    CollectiveMode mode_;
    TimeGrid grid_;
    double astar_;
    double xi_;
    std::vector<double> z_;
    std::vector<double> y_;
    std::vector<double> c_;
};

namespace detail {

inline void require_same_grid(const TimeGrid& grid, const MortalityTable& mortality) {
    if (!(grid == mortality.grid()))
        throw ConfigError("mortality table is defined on a different grid");
}

inline void store_entry(ValueTable& table, std::size_t k, std::size_t i, double y, double log_z) {
    const double z = std::exp(log_z);
    const double c = 1.0 / y;
    if (!std::isfinite(y) || !std::isfinite(log_z) || !(z > 0.0) || !std::isfinite(z) || !(c > 0.0))
        throw DivergenceError(k, i, "value recursion diverged");
    table.set(k, i, z, y, c);
}

inline double log_sum_exp(const std::vector<double>& terms, std::size_t count) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < count; ++j) peak = std::max(peak, terms[j]);
    if (!std::isfinite(peak)) return peak;
    double sum = 0.0;
    for (std::size_t j = 0; j < count; ++j) sum += std::exp(terms[j] - peak);
    return peak + std::log(sum);
}

}  // namespace detail

/// Backward induction for the optimal value per unit wealth.
///
/// The final grid point consumes everything (z = y = c* = 1). Earlier points
/// follow y_t = 1 + phi_t^(rho/(1-rho)) y_{t+dt} for the individual and
/// infinite funds. A finite fund of n members keeps one row per survivor
/// count i and mixes the next-step rows through the binomial survival law,
/// computed in log space.
inline ValueTable solve(const CollectiveMode& mode, const TimeGrid& grid, const MarketParams& market,
                        const Preferences& prefs, const MortalityTable& mortality) {
    market.validate();
    detail::require_same_grid(grid, mortality);
    const double alpha = prefs.alpha;
    const double rho = prefs.rho;
    const double q = rho / (1.0 - rho);
    const double dt = grid.dt();
    ValueTable table(mode, grid, optimal_proportion(market, alpha), growth_exponent(market, alpha));
    const std::size_t last = grid.last();

    if (!mode.is_finite()) {
        const int flag = mode.collective_flag();
        table.set(last, 0, 1.0, 1.0, 1.0);
        double y_next = 1.0;
        for (std::size_t k = last; k-- > 0;) {
            const double step = std::pow(phi(prefs, market, dt, mortality.survival_prob(k), flag), q);
            const double y = 1.0 + step * y_next;
            detail::store_entry(table, k, 0, y, std::log(y) / q);
            y_next = y;
        }
        return table;
    }

    const std::size_t n = mode.n();
    std::vector<double> log_z_next(n + 1, 0.0);
    std::vector<double> log_z(n + 1, 0.0);
    std::vector<double> log_j(n + 1, 0.0);
    for (std::size_t j = 1; j <= n; ++j) log_j[j] = std::log(static_cast<double>(j));
    for (std::size_t i = 1; i <= n; ++i) table.set(last, i, 1.0, 1.0, 1.0);

    const double log_discount = std::log(prefs.beta) / rho + table.xi() * dt;
    std::vector<double> terms(n);
    for (std::size_t k = last; k-- > 0;) {
        const double s = mortality.survival_prob(k);
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 1; j <= i; ++j) {
                terms[j - 1] = (1.0 - alpha) * (log_j[j] - log_j[i]) +
                               log_binomial_pmf(static_cast<std::int64_t>(i),
                                                static_cast<std::int64_t>(j), s) +
                               alpha * log_z_next[j];
            }
            const double log_theta = log_discount + detail::log_sum_exp(terms, i) / alpha;
            const double y = 1.0 + std::exp(q * log_theta);
            log_z[i] = std::log(y) / q;
            detail::store_entry(table, k, i, y, log_z[i]);
        }
        std::swap(log_z, log_z_next);
    }
    return table;
}

/// Constant-mix strategy: a stock proportion per grid point and a
/// consumption rate per grid point and survivor count.
struct Strategy {
    CollectiveMode mode = CollectiveMode::individual();
    std::vector<double> a;  ///< per grid point
    std::vector<double> c;  ///< row-major by survivor row, then grid point

    static Strategy constant(const CollectiveMode& mode, const TimeGrid& grid, double a, double c) {
        Strategy s;
        s.mode = mode;
        s.a.assign(grid.size(), a);
        s.c.assign(mode.rows() * grid.size(), c);
        return s;
    }

    double& consumption(std::size_t k, std::size_t i, std::size_t grid_size) {
        return c[row(i) * grid_size + k];
    }
    double consumption(std::size_t k, std::size_t i, std::size_t grid_size) const {
        return c[row(i) * grid_size + k];
    }

private:
    std::size_t row(std::size_t i) const { return mode.is_finite() ? i - 1 : 0; }
};

/// The strategy a solved table prescribes: a* everywhere and c* per entry.
inline Strategy optimal_strategy(const ValueTable& table) {
    const auto& grid = table.grid();
    Strategy s = Strategy::constant(table.mode(), grid, table.astar(), 1.0);
    for (std::size_t i = table.first_survivor_label(); i <= table.last_survivor_label(); ++i)
        for (std::size_t k = 0; k < grid.size(); ++k)
            s.consumption(k, i, grid.size()) = table.cstar(k, i);
    return s;
}

/// Utility per unit initial wealth of a given strategy: the same backward
/// recursion without the optimisation, using the closed-form lognormal
/// moment E[G^alpha] = exp(alpha kappa(a) dt) of one period's growth.
inline double evaluate_policy(const Strategy& strategy, const CollectiveMode& mode,
                              const TimeGrid& grid, const MarketParams& market,
                              const Preferences& prefs, const MortalityTable& mortality) {
    market.validate();
    detail::require_same_grid(grid, mortality);
    if (!(strategy.mode == mode)) throw ConfigError("strategy: mode does not match");
    if (strategy.a.size() != grid.size() || strategy.c.size() != mode.rows() * grid.size())
        throw ConfigError("strategy: dimensions do not match the mode and grid");
    for (double c : strategy.c)
        if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("strategy: consumption rate outside [0,1]");

    const double alpha = prefs.alpha;
    const double rho = prefs.rho;
    const double dt = grid.dt();
    const std::size_t N = grid.size();
    const std::size_t last = grid.last();
    const auto aggregate = [&](double c, double continuation, std::size_t k, std::size_t i) {
        const double v = std::pow(std::pow(c, rho) + prefs.beta * std::pow(continuation, rho),
                                  1.0 / rho);
        if (std::isnan(v) || std::isinf(v)) throw DivergenceError(k, i, "policy evaluation diverged");
        return v;
    };

    if (!mode.is_finite()) {
        const double exponent = 1.0 / alpha - mode.collective_flag();
        double v = strategy.consumption(last, 0, N);
        for (std::size_t k = last; k-- > 0;) {
            const double c = strategy.consumption(k, 0, N);
            const double growth = std::exp(portfolio_growth(market, strategy.a[k], alpha) * dt);
            const double s = mortality.survival_prob(k);
            v = aggregate(c, growth * std::pow(s, exponent) * (1.0 - c) * v, k, 0);
        }
        return v;
    }

    const std::size_t n = mode.n();
    std::vector<double> v_next(n + 1, 0.0);
    std::vector<double> v(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) v_next[i] = strategy.consumption(last, i, N);
    for (std::size_t k = last; k-- > 0;) {
        const double s = mortality.survival_prob(k);
        const double growth = std::exp(portfolio_growth(market, strategy.a[k], alpha) * dt);
        for (std::size_t i = 1; i <= n; ++i) {
            double moment = 0.0;
            for (std::size_t j = 1; j <= i; ++j) {
                const double share = static_cast<double>(j) / static_cast<double>(i);
                moment += std::pow(share, 1.0 - alpha) *
                          binomial_transition(static_cast<std::int64_t>(i),
                                              static_cast<std::int64_t>(j), s) *
                          std::pow(v_next[j], alpha);
            }
            const double c = strategy.consumption(k, i, N);
            v[i] = aggregate(c, growth * (1.0 - c) * std::pow(moment, 1.0 / alpha), k, i);
        }
        std::swap(v, v_next);
    }
    return v_next[n];
}

}  // namespace pensionlab
