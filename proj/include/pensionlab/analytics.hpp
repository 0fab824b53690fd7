#pragma once

#include <cmath>
#include <cstddef>
#include <string_view>
#include <vector>

#include "pensionlab/core.hpp"
#include "pensionlab/errors.hpp"
#include "pensionlab/mortality.hpp"
#include "pensionlab/solver.hpp"

namespace pensionlab {

/// Parameters of the lognormal laws of wealth per survivor X_t and
/// consumption per survivor gamma_t under the optimal strategy.
struct LognormalSchedule {
    TimeGrid grid;
    std::vector<double> mu_x;
    std::vector<double> sigma_x;
    std::vector<double> mu_gamma;
    std::vector<double> sigma_gamma;
    /// mu_x[k+1] - mu_x[k] as computed by the recursion.
    std::vector<double> mu_x_step;
};

/// Mean and standard deviation of log X_t and log gamma_t for the individual
/// and infinite funds, starting from wealth x0. For the individual problem
/// the law is that of a member still alive at t.
inline LognormalSchedule wealth_schedule(const ValueTable& table, const MarketParams& market,
                                         const Preferences& prefs, const MortalityTable& mortality,
                                         double x0) {
    if (table.mode().is_finite())
        throw ConfigError("distribution: wealth is lognormal only for the individual and infinite "
                          "modes");
    if (!(x0 > 0.0) || !std::isfinite(x0)) throw ConfigError("distribution: x0 must be positive");
    market.validate();
    detail::require_same_grid(table.grid(), mortality);

    const auto& grid = table.grid();
    const std::size_t N = grid.size();
    const int flag = table.mode().collective_flag();
    const double drift = portfolio_growth(market, table.astar(), 0.0) * grid.dt();
    const double vol = market.sigma * std::abs(table.astar());
    const double consumption_exponent = prefs.rho / (prefs.rho - 1.0);

    LognormalSchedule out;
    out.grid = grid;
    out.mu_x.resize(N);
    out.sigma_x.resize(N);
    out.mu_gamma.resize(N);
    out.sigma_gamma.resize(N);
    out.mu_x_step.resize(N - 1);
    out.mu_x[0] = std::log(x0);
    for (std::size_t k = 0; k + 1 < N; ++k) {
        const double s = mortality.survival_prob(k);
        out.mu_x_step[k] = -flag * std::log(s) + std::log1p(-table.cstar(k)) + drift;
        out.mu_x[k + 1] = out.mu_x[k] + out.mu_x_step[k];
    }
    for (std::size_t k = 0; k < N; ++k) {
        out.sigma_x[k] = vol * std::sqrt(grid.elapsed(k));
        out.sigma_gamma[k] = out.sigma_x[k];
        out.mu_gamma[k] = consumption_exponent * std::log(table.z(k)) + out.mu_x[k];
    }
    return out;
}

/// E(log gamma_{t+dt} | gamma_t) - log gamma_t for the individual (C = 0)
/// or infinite (C = 1) fund.
inline double consumption_drift(const Preferences& prefs, const MarketParams& market, double dt,
                                double s, int collective_flag) {
    const double q = prefs.rho / (1.0 - prefs.rho);
    return -collective_flag * std::log(s) + q * log_phi(prefs, market, dt, s, collective_flag) +
           log_wealth_drift(market, prefs.alpha) * dt;
}

enum class Direction { Increasing, Decreasing, Constant };

inline std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::Increasing: return "Increasing";
        case Direction::Decreasing: return "Decreasing";
        case Direction::Constant: return "Constant";
    }
    return "?";
}

/// With mu = r = 0 and beta = 1 consumption is deterministic and
/// gamma_{t+dt} = s^e gamma_t with e = (1/alpha - C/rho) rho/(1-rho).
/// Since 0 < s < 1 the sign of e decides the direction.
inline double consumption_growth_exponent(const Preferences& prefs, int collective_flag) {
    return (1.0 / prefs.alpha - collective_flag / prefs.rho) * (prefs.rho / (1.0 - prefs.rho));
}

inline Direction consumption_direction(const Preferences& prefs, int collective_flag) {
    const double e = consumption_growth_exponent(prefs, collective_flag);
    if (e > 0.0) return Direction::Decreasing;
    if (e < 0.0) return Direction::Increasing;
    return Direction::Constant;
}

/// Elasticity of intertemporal substitution. Depends on neither time nor
/// the mortality table.
inline double eis(const Preferences& prefs, const MarketParams& market) {
    const double a = prefs.alpha;
    const double rho = prefs.rho;
    const double premium = market.mu - market.r;
    return (1.0 / (1.0 - rho)) *
           (1.0 - premium * (1.0 + a * (rho - 2.0)) / ((a - 1.0) * (a - 1.0) * market.sigma *
                                                        market.sigma));
}

}  // namespace pensionlab
