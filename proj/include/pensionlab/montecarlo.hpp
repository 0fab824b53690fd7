#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

#include "pensionlab/binomial.hpp"
#include "pensionlab/core.hpp"
#include "pensionlab/errors.hpp"
#include "pensionlab/mortality.hpp"
#include "pensionlab/solver.hpp"

namespace pensionlab {

/// Independent random stream for one path, derived from (seed, path index)
/// only, so a path's draws do not depend on how paths are split across
/// threads. mt19937_64 and seed_seq are fully specified by the standard.
class PathStream {
public:
    PathStream(std::uint64_t seed, std::uint64_t path) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
        engine_.seed(seq);
    }

    /// Uniform on the open interval (0,1) from the top 53 bits.
    double uniform() {
        const std::uint64_t bits = engine_() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by inversion of the uniform draw.
    double normal() {
        static const boost::math::normal_distribution<double> standard;
        return boost::math::quantile(standard, uniform());
    }

private:
    std::mt19937_64 engine_;
};

/// Smallest k with Pr(Bin(n,s) <= k) >= u, found by walking the pmf from
/// the mean outwards.
inline std::int64_t binomial_inverse_cdf(std::int64_t n, double s, double u) {
    if (n == 0 || s == 0.0) return 0;
    if (s == 1.0) return n;
    const boost::math::binomial_distribution<double> law(static_cast<double>(n), s);
    std::int64_t k = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * s));
    double cdf = boost::math::cdf(law, static_cast<double>(k));
    if (cdf >= u) {
        while (k > 0) {
            const double below = cdf - binomial_transition(n, k, s);
            if (below < u) break;
            cdf = below;
            --k;
        }
        return k;
    }
    while (k < n && cdf < u) {
        ++k;
        cdf += binomial_transition(n, k, s);
    }
    return k;
}

struct RecordOptions {
    bool survivors = true;
    bool wealth = true;
    bool consumption = true;
    bool post_consumption = false;
};

struct SimulationConfig {
    std::size_t paths = 1;
    std::uint64_t seed = 0;
    CollectiveMode mode = CollectiveMode::infinite();
    Strategy strategy;
    double x0 = 1.0;
    RecordOptions record;
    unsigned threads = 1;
};

/// Per-path series stored row-major (path, grid point). Survivors are counts
/// for finite funds and the surviving fraction for the infinite fund. Wealth
/// is the fund per survivor before consumption.
struct SimulationResult {
    TimeGrid grid;
    CollectiveMode mode = CollectiveMode::infinite();
    std::size_t paths = 0;
    RecordOptions record;
    std::vector<double> survivors;
    std::vector<double> wealth;
    std::vector<double> consumption;
    /// Fund per survivor right after consumption and redistribution; zero
    /// once the fund is empty and at the final grid point.
    std::vector<double> post_consumption;

    std::size_t index(std::size_t path, std::size_t k) const { return path * grid.size() + k; }
};

namespace detail {

struct PathBuffers {
    std::span<double> survivors;
    std::span<double> wealth;
    std::span<double> consumption;
    std::span<double> post;
};

inline void simulate_path(const SimulationConfig& cfg, const TimeGrid& grid,
                          const MarketParams& market, const MortalityTable& mortality,
                          std::uint64_t path, PathBuffers out) {
    const std::size_t N = grid.size();
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    PathStream stream(cfg.seed, path);
    const bool infinite = cfg.mode.kind() == CollectiveKind::Infinite;

    double x = cfg.x0;
    std::int64_t alive = infinite ? 0 : static_cast<std::int64_t>(cfg.mode.n());
    bool empty = false;
    for (std::size_t k = 0; k < N; ++k) {
        const double count = infinite ? mortality.alive_probability(k) : static_cast<double>(alive);
        if (empty) {
            out.survivors[k] = count;
            out.wealth[k] = 0.0;
            out.consumption[k] = 0.0;
            out.post[k] = 0.0;
            continue;
        }
        const std::size_t row = cfg.mode.is_finite() ? static_cast<std::size_t>(alive) : 0;
        const double rate = cfg.strategy.consumption(k, row, N);
        const double gamma = rate * x;
        out.survivors[k] = count;
        out.wealth[k] = x;
        out.consumption[k] = gamma;
        if (grid.is_last(k)) {
            out.post[k] = 0.0;
            break;
        }

        const double s = mortality.survival_prob(k);
        double post = 0.0;
        if (infinite) {
            post = (x - gamma) / s;
        } else {
            const std::int64_t next = binomial_inverse_cdf(alive, s, stream.uniform());
            if (next == 0) {
                empty = true;
            } else {
                post = static_cast<double>(alive) / static_cast<double>(next) * (x - gamma);
            }
            alive = next;
        }
        out.post[k] = post;
        if (empty) continue;
        const double a = cfg.strategy.a[k];
        const double drift = (a * (market.mu - market.r) + market.r - 0.5 * a * a * market.sigma *
                                                                          market.sigma) * dt;
        x = post * std::exp(drift + a * market.sigma * sqrt_dt * stream.normal());
    }
}

}  // namespace detail

/// Simulates fund paths under a constant-mix strategy with exact lognormal
/// steps between consumption dates. Results are bitwise identical for any
/// thread count.
inline SimulationResult simulate(const SimulationConfig& cfg, const TimeGrid& grid,
                                 const MarketParams& market, const MortalityTable& mortality) {
    market.validate();
    detail::require_same_grid(grid, mortality);
    if (cfg.paths < 1) throw ConfigError("simulation.paths must be at least 1");
    if (!(cfg.x0 > 0.0) || !std::isfinite(cfg.x0)) throw ConfigError("simulation: x0 must be positive");
    if (!(cfg.strategy.mode == cfg.mode)) throw ConfigError("simulation: strategy mode does not match");
    if (cfg.strategy.a.size() != grid.size() || cfg.strategy.c.size() != cfg.mode.rows() * grid.size())
        throw ConfigError("simulation: strategy dimensions do not match the mode and grid");

    const std::size_t N = grid.size();
    SimulationResult res;
    res.grid = grid;
    res.mode = cfg.mode;
    res.paths = cfg.paths;
    res.record = cfg.record;
    const std::size_t total = cfg.paths * N;
    res.survivors.assign(cfg.record.survivors ? total : 0, 0.0);
    res.wealth.assign(cfg.record.wealth ? total : 0, 0.0);
    res.consumption.assign(cfg.record.consumption ? total : 0, 0.0);
    res.post_consumption.assign(cfg.record.post_consumption ? total : 0, 0.0);

    const auto run_range = [&](std::size_t begin, std::size_t end) {
        std::vector<double> scratch(4 * N);
        for (std::size_t p = begin; p < end; ++p) {
            const auto pick = [&](std::vector<double>& series, std::size_t slot) {
                return series.empty() ? std::span<double>(scratch.data() + slot * N, N)
                                      : std::span<double>(series.data() + p * N, N);
            };
            detail::simulate_path(cfg, grid, market, mortality, p,
                                  {pick(res.survivors, 0), pick(res.wealth, 1),
                                   pick(res.consumption, 2), pick(res.post_consumption, 3)});
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(cfg.threads, 1, cfg.paths);
    if (workers == 1) {
        run_range(0, cfg.paths);
        return res;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (cfg.paths + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(cfg.paths, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(run_range, begin, end);
    }
    for (auto& t : pool) t.join();
    return res;
}

/// Empirical quantiles per grid point over the paths whose fund is still
/// alive there. Quantiles interpolate linearly between order statistics at
/// position (m-1)p, so the median of two values is their midpoint.
struct PercentileTable {
    TimeGrid grid;
    std::vector<double> probs;
    std::vector<std::size_t> alive;         ///< paths contributing per grid point
    std::vector<double> wealth_quantiles;   ///< row-major (grid point, prob)
    std::vector<double> consumption_quantiles;
    std::vector<double> mean_log_wealth;
    std::vector<double> sd_log_wealth;      ///< sample standard deviation (m-1 divisor)
    std::vector<double> mean_survivors;     ///< over all paths, dead funds included

    double wealth_quantile(std::size_t k, std::size_t j) const {
        return wealth_quantiles[k * probs.size() + j];
    }
    double consumption_quantile(std::size_t k, std::size_t j) const {
        return consumption_quantiles[k * probs.size() + j];
    }
};

inline double empirical_quantile(std::span<const double> sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline PercentileTable summarize(const SimulationResult& result, std::span<const double> probs) {
    if (result.paths == 0) throw ConfigError("summarize: empty simulation result");
    if (!result.record.wealth || !result.record.consumption || !result.record.survivors)
        throw ConfigError("summarize: survivors, wealth and consumption must be recorded");
    for (double p : probs)
        if (!(p > 0.0 && p < 1.0)) throw ConfigError("summarize: probabilities must lie in (0,1)");

    const std::size_t N = result.grid.size();
    const std::size_t P = probs.size();
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    PercentileTable out;
    out.grid = result.grid;
    out.probs.assign(probs.begin(), probs.end());
    out.alive.assign(N, 0);
    out.wealth_quantiles.assign(N * P, nan);
    out.consumption_quantiles.assign(N * P, nan);
    out.mean_log_wealth.assign(N, nan);
    out.sd_log_wealth.assign(N, nan);
    out.mean_survivors.assign(N, 0.0);

    std::vector<double> xs;
    std::vector<double> gs;
    for (std::size_t k = 0; k < N; ++k) {
        xs.clear();
        gs.clear();
        double survivors = 0.0;
        for (std::size_t p = 0; p < result.paths; ++p) {
            const auto idx = result.index(p, k);
            survivors += result.survivors[idx];
            if (result.survivors[idx] > 0.0) {
                xs.push_back(result.wealth[idx]);
                gs.push_back(result.consumption[idx]);
            }
        }
        out.mean_survivors[k] = survivors / static_cast<double>(result.paths);
        out.alive[k] = xs.size();
        if (xs.empty()) continue;

        double sum = 0.0;
        for (double x : xs) sum += std::log(x);
        const double mean = sum / static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs) ss += (std::log(x) - mean) * (std::log(x) - mean);
        out.mean_log_wealth[k] = mean;
        out.sd_log_wealth[k] = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;

        std::sort(xs.begin(), xs.end());
        std::sort(gs.begin(), gs.end());
        for (std::size_t j = 0; j < P; ++j) {
            out.wealth_quantiles[k * P + j] = empirical_quantile(xs, probs[j]);
            out.consumption_quantiles[k * P + j] = empirical_quantile(gs, probs[j]);
        }
    }
    return out;
}

}  // namespace pensionlab
