#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "oracle.hpp"
#include "pensionlab/mortality.hpp"
#include "pensionlab/solver.hpp"

namespace fixtures {

using namespace pensionlab;

struct Case {
    TimeGrid grid = make_time_grid(0, 1, 2);
    MarketParams market{0, 0, 0.15};
    Preferences prefs = make_preferences(-1, -1, 0, 1);
    MortalityTable mortality = MortalityTable::from_pmf(make_time_grid(0, 1, 2), {0, 1});
};

inline Case paper_like(std::size_t points) {
    Case s;
    s.grid = make_time_grid(65, 1, 65.0 + points);
    s.market = MarketParams{0.062, 0.027, 0.15};
    s.prefs = make_preferences(-1, -1, 0, 1);
    s.mortality = gompertz_makeham(5e-4, 1e-5, 0.1, s.grid);
    return s;
}

inline Case random_setup(std::mt19937_64& rng, std::size_t points) {
    std::uniform_real_distribution<double> u(0, 1);
    Case s;
    const double dt = u(rng) < 0.5 ? 1.0 : 0.5;
    s.grid = make_time_grid(0, dt, dt * points);
    const auto pick_exponent = [&] {
        const double x = -3.0 + 3.7 * u(rng);
        return std::abs(x) < 0.1 ? -0.5 : x;
    };
    const double alpha = pick_exponent();
    const double rho = pick_exponent();
    s.prefs = make_preferences(alpha, rho, 0.05 * u(rng), dt);
    const double sigma = 0.1 + 0.2 * u(rng);
    const double r = 0.05 * u(rng);
    const double astar = -1.0 + 3.0 * u(rng);
    s.market = MarketParams{r + astar * (1 - alpha) * sigma * sigma, r, sigma};
    std::vector<double> surv(points - 1);
    for (auto& v : surv) v = 0.3 + 0.69 * u(rng);
    s.mortality = MortalityTable::from_step_survival(s.grid, surv);
    return s;
}

inline oracle::Problem to_oracle(const Case& s) {
    oracle::Problem p;
    for (std::size_t k = 0; k < s.grid.size(); ++k) p.s.push_back(s.mortality.survival_prob(k));
    p.dt = s.grid.dt();
    p.mu = s.market.mu;
    p.r = s.market.r;
    p.sigma = s.market.sigma;
    p.alpha = s.prefs.alpha;
    p.rho = s.prefs.rho;
    p.beta = s.prefs.beta;
    return p;
}

}  // namespace fixtures
