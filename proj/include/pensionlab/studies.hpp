#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pensionlab/core.hpp"
#include "pensionlab/errors.hpp"
#include "pensionlab/mortality.hpp"
#include "pensionlab/solver.hpp"

namespace pensionlab {

/// Epstein-Zin utility of receiving gamma at every grid date while alive.
/// Positively homogeneous in gamma.
inline double annuity_utility(double gamma, const MortalityTable& mortality,
                              const Preferences& prefs) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("annuity: income must be positive");
    const double rho = prefs.rho;
    const double gamma_rho = std::pow(gamma, rho);
    const auto& grid = mortality.grid();
    double u = gamma;
    for (std::size_t k = grid.last(); k-- > 0;) {
        const double s = mortality.survival_prob(k);
        u = std::pow(gamma_rho + prefs.beta * std::pow(s, rho / prefs.alpha) * std::pow(u, rho),
                     1.0 / rho);
        if (!std::isfinite(u) || !(u > 0.0)) throw DivergenceError(k, 0, "annuity utility diverged");
    }
    return u;
}

/// Price of the constant income whose utility matches the fund's optimal
/// utility, divided by the budget, minus one. The annuity is priced at the
/// risk-free rate with no loading.
inline double annuity_equivalent(const ValueTable& table, double budget,
                                 const MortalityTable& mortality, const MarketParams& market,
                                 const Preferences& prefs) {
    if (!(budget > 0.0) || !std::isfinite(budget)) throw ConfigError("budget must be positive");
    const double income = budget * table.z0() / annuity_utility(1.0, mortality, prefs);
    return income * annuity_factor(mortality, market.r);
}

inline double annuity_outperformance(const ValueTable& table, double budget,
                                     const MortalityTable& mortality, const MarketParams& market,
                                     const Preferences& prefs) {
    const double equivalent = annuity_equivalent(table, budget, mortality, market, prefs);
    if (!std::isfinite(equivalent)) throw DivergenceError(0, 0, "annuity equivalent diverged");
    return equivalent / budget - 1.0;
}

/// Relative gain of scenario A over scenario B from their outperformances.
inline double improvement(double r_a, double r_b) {
    if (!(r_b > -1.0)) throw DomainError("improvement: baseline outperformance must exceed -1");
    return (1.0 + r_a) / (1.0 + r_b) - 1.0;
}

struct ScenarioReport {
    std::string id;
    double mu = 0.0;
    double r = 0.0;
    CollectiveMode mode = CollectiveMode::infinite();
    double annuity_equivalent = 0.0;
    double outperformance = 0.0;
};

inline ScenarioReport run_scenario(std::string id, const CollectiveMode& mode,
                                   const MarketParams& market, const Preferences& prefs,
                                   const MortalityTable& mortality, double budget) {
    const auto table = solve(mode, mortality.grid(), market, prefs, mortality);
    ScenarioReport rep;
    rep.id = std::move(id);
    rep.mu = market.mu;
    rep.r = market.r;
    rep.mode = mode;
    rep.annuity_equivalent = annuity_equivalent(table, budget, mortality, market, prefs);
    rep.outperformance = rep.annuity_equivalent / budget - 1.0;
    return rep;
}

namespace detail {

inline void require_sorted_sizes(std::span<const std::size_t> n_list) {
    if (n_list.empty()) throw ConfigError("n_list must not be empty");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] < 1) throw ConfigError("n_list entries must be at least 1");
        if (i > 0 && n_list[i] <= n_list[i - 1])
            throw ConfigError("n_list must be strictly increasing");
    }
}

}  // namespace detail

struct FundSizeStudy {
    std::vector<std::size_t> n;
    std::vector<double> outperformance;
    double asymptote = 0.0;  ///< infinite-fund outperformance
    /// Smallest listed n reaching 90% of the asymptote, if any.
    std::optional<std::size_t> n_at_90_percent;
    bool monotone = true;  ///< non-decreasing in n across the list
};

/// A finite table of size n_max holds z_{n,t} for every n <= n_max, so one
/// solve serves the whole list.
inline FundSizeStudy fund_size_study(std::span<const std::size_t> n_list, const TimeGrid& grid,
                                     const MarketParams& market, const Preferences& prefs,
                                     const MortalityTable& mortality, double budget) {
    detail::require_sorted_sizes(n_list);
    const auto finite = solve(CollectiveMode::finite(n_list.back()), grid, market, prefs, mortality);
    const auto infinite = solve(CollectiveMode::infinite(), grid, market, prefs, mortality);
    const double af = annuity_factor(mortality, market.r);
    const double u1 = annuity_utility(1.0, mortality, prefs);

    if (!(budget > 0.0) || !std::isfinite(budget)) throw ConfigError("budget must be positive");
    const auto outperformance = [&](double z0) { return budget * z0 / u1 * af / budget - 1.0; };

    FundSizeStudy out;
    out.asymptote = outperformance(infinite.z0());
    for (std::size_t n : n_list) {
        const double perf = outperformance(finite.z(0, n));
        if (!out.outperformance.empty() && perf < out.outperformance.back()) out.monotone = false;
        out.n.push_back(n);
        out.outperformance.push_back(perf);
        if (!out.n_at_90_percent && perf >= 0.9 * out.asymptote) out.n_at_90_percent = n;
    }
    return out;
}

struct ConvergenceReport {
    std::vector<std::size_t> n;
    std::vector<double> z_n;
    std::vector<double> abs_diff;
    std::vector<double> bound;  ///< C n^(-1/2), NaN below the calibration size
    double z_inf = 0.0;
    std::size_t calibration_n = 0;
    double constant = 0.0;
    double exponent = 0.0;       ///< least-squares slope of log|diff| against log n
    double log_intercept = 0.0;
    bool strictly_decreasing = true;
    bool bound_holds = true;     ///< for every n >= calibration_n
};

inline ConvergenceReport convergence_study(std::span<const std::size_t> n_list,
                                           const TimeGrid& grid, const MarketParams& market,
                                           const Preferences& prefs,
                                           const MortalityTable& mortality) {
    detail::require_sorted_sizes(n_list);
    const auto finite = solve(CollectiveMode::finite(n_list.back()), grid, market, prefs, mortality);
    const auto infinite = solve(CollectiveMode::infinite(), grid, market, prefs, mortality);

    ConvergenceReport rep;
    rep.z_inf = infinite.z0();
    for (std::size_t n : n_list) {
        const double z = finite.z(0, n);
        const double diff = std::abs(z - rep.z_inf);
        if (!std::isfinite(diff)) throw DivergenceError(0, n, "convergence difference is not finite");
        if (!rep.abs_diff.empty() && !(diff < rep.abs_diff.back())) rep.strictly_decreasing = false;
        rep.n.push_back(n);
        rep.z_n.push_back(z);
        rep.abs_diff.push_back(diff);
    }

    const auto calib = std::find_if(rep.n.begin(), rep.n.end(), [](std::size_t n) { return n >= 4; });
    if (calib == rep.n.end()) throw ConfigError("convergence: n_list needs an entry >= 4");
    const auto ci = static_cast<std::size_t>(calib - rep.n.begin());
    rep.calibration_n = *calib;
    rep.constant = rep.abs_diff[ci] * std::sqrt(static_cast<double>(rep.calibration_n));
    rep.bound.assign(rep.n.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = ci; i < rep.n.size(); ++i) {
        rep.bound[i] = rep.constant / std::sqrt(static_cast<double>(rep.n[i]));
        if (rep.abs_diff[i] > rep.bound[i] * (1.0 + 1e-12)) rep.bound_holds = false;
    }

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < rep.n.size(); ++i) {
        if (!(rep.abs_diff[i] > 0.0)) continue;
        const double x = std::log(static_cast<double>(rep.n[i]));
        const double y = std::log(rep.abs_diff[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) throw ConfigError("convergence: need at least two nonzero differences to fit");
    const double md = static_cast<double>(m);
    rep.exponent = (md * sxy - sx * sy) / (md * sxx - sx * sx);
    rep.log_intercept = (sy - rep.exponent * sx) / md;
    return rep;
}

}  // namespace pensionlab
