#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "pensionlab/analytics.hpp"
#include "pensionlab/config.hpp"
#include "pensionlab/errors.hpp"
#include "pensionlab/montecarlo.hpp"
#include "pensionlab/solver.hpp"
#include "pensionlab/studies.hpp"

namespace pensionlab {

/// Locale-independent 12-significant-digit rendering used for every CSV.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // also folds -0
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                   std::chars_format::general, 12);
    return std::string(buf.data(), res.ptr);
}

/// Minimal CSV writer: binary mode, '\n' line endings, fields pre-formatted.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
        : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        bool first = true;
        for (auto h : header) {
            if (!first) out_ << ',';
            out_ << h;
            first = false;
        }
        out_ << '\n';
    }

    CsvWriter& field(std::string_view text) {
        if (!row_empty_) out_ << ',';
        out_ << text;
        row_empty_ = false;
        return *this;
    }
    CsvWriter& field(double v) { return field(format_number(v)); }
    CsvWriter& field(std::size_t v) { return field(std::string_view(std::to_string(v))); }
    void end_row() {
        out_ << '\n';
        row_empty_ = true;
    }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    bool row_empty_ = true;
};

using FileList = std::vector<std::filesystem::path>;

namespace detail {

inline std::filesystem::path prepare_output(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace detail

/// value.csv (t,i,z,c_star) and meta.csv (a_star,xi). i is the survivor
/// count for finite funds and 0 otherwise.
inline FileList cmd_solve(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    const auto problem = build_problem(cfg);
    const auto table = solve(problem.mode, problem.grid, problem.market, problem.prefs,
                             problem.mortality);
    const auto dir = detail::prepare_output(out_dir);

    CsvWriter value(dir / "value.csv", {"t", "i", "z", "c_star"});
    for (std::size_t k = 0; k < problem.grid.size(); ++k) {
        for (std::size_t i = table.first_survivor_label(); i <= table.last_survivor_label(); ++i) {
            value.field(problem.grid.time(k)).field(i).field(table.z(k, i)).field(table.cstar(k, i));
            value.end_row();
        }
    }
    CsvWriter meta(dir / "meta.csv", {"a_star", "xi"});
    meta.field(table.astar()).field(table.xi());
    meta.end_row();
    return {value.path(), meta.path()};
}

/// dist.csv with the lognormal parameters of wealth and consumption.
inline FileList cmd_distribution(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    const auto problem = build_problem(cfg);
    if (problem.mode.is_finite())
        throw ConfigError("mode: distribution is unsupported for finite funds; use individual or "
                          "infinite");
    const auto table = solve(problem.mode, problem.grid, problem.market, problem.prefs,
                             problem.mortality);
    const auto sched = wealth_schedule(table, problem.market, problem.prefs, problem.mortality,
                                       cfg.budget);
    const auto dir = detail::prepare_output(out_dir);
    CsvWriter dist(dir / "dist.csv", {"t", "mu_x", "sigma_x", "mu_gamma", "sigma_gamma"});
    for (std::size_t k = 0; k < problem.grid.size(); ++k) {
        dist.field(problem.grid.time(k))
            .field(sched.mu_x[k])
            .field(sched.sigma_x[k])
            .field(sched.mu_gamma[k])
            .field(sched.sigma_gamma[k]);
        dist.end_row();
    }
    return {dist.path()};
}

inline constexpr std::array<double, 5> kSummaryProbs{0.05, 0.25, 0.5, 0.75, 0.95};

/// paths_summary.csv: empirical wealth quantiles and log-wealth moments over
/// living funds, with the lognormal schedule alongside (nan for finite
/// funds, whose wealth is not lognormal). consumption_summary.csv holds the
/// consumption quantiles.
inline FileList cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    const auto problem = build_problem(cfg);
    const auto table = solve(problem.mode, problem.grid, problem.market, problem.prefs,
                             problem.mortality);
    SimulationConfig sim;
    sim.paths = cfg.simulation.paths;
    sim.seed = cfg.simulation.seed;
    sim.threads = cfg.simulation.threads;
    sim.mode = problem.mode;
    sim.strategy = optimal_strategy(table);
    sim.x0 = cfg.budget;
    const auto result = simulate(sim, problem.grid, problem.market, problem.mortality);
    const auto summary = summarize(result, kSummaryProbs);

    const std::size_t N = problem.grid.size();
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> mu_x(N, nan);
    std::vector<double> sigma_x(N, nan);
    if (!problem.mode.is_finite()) {
        const auto sched = wealth_schedule(table, problem.market, problem.prefs, problem.mortality,
                                           cfg.budget);
        mu_x = sched.mu_x;
        sigma_x = sched.sigma_x;
    }
    const boost::math::normal_distribution<double> standard;

    const auto dir = detail::prepare_output(out_dir);
    CsvWriter paths(dir / "paths_summary.csv",
                    {"t", "q05", "q25", "q50", "q75", "q95", "mean_log_x", "sd_log_x", "alive",
                     "mean_survivors", "mu_x", "sigma_x", "analytic_q05", "analytic_q25",
                     "analytic_q50", "analytic_q75", "analytic_q95"});
    CsvWriter cons(dir / "consumption_summary.csv", {"t", "q05", "q25", "q50", "q75", "q95"});
    for (std::size_t k = 0; k < N; ++k) {
        paths.field(problem.grid.time(k));
        cons.field(problem.grid.time(k));
        for (std::size_t j = 0; j < kSummaryProbs.size(); ++j) {
            paths.field(summary.wealth_quantile(k, j));
            cons.field(summary.consumption_quantile(k, j));
        }
        paths.field(summary.mean_log_wealth[k])
            .field(summary.sd_log_wealth[k])
            .field(summary.alive[k])
            .field(summary.mean_survivors[k])
            .field(mu_x[k])
            .field(sigma_x[k]);
        for (double p : kSummaryProbs)
            paths.field(std::exp(mu_x[k] + sigma_x[k] * boost::math::quantile(standard, p)));
        paths.end_row();
        cons.end_row();
    }
    return {paths.path(), cons.path()};
}

/// scenarios.csv and improvements.csv. Scenario rates are real rates and
/// replace the configured market drift and risk-free rate; sigma,
/// preferences, grid and mortality come from the config.
inline FileList cmd_scenarios(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    if (cfg.scenarios.empty()) throw ConfigError("scenarios: at least one scenario is required");
    const auto problem = build_problem(cfg);
    std::vector<ScenarioReport> reports;
    for (const auto& spec : cfg.scenarios) {
        MarketParams market{spec.mu, spec.r, cfg.sigma};
        market.validate();
        reports.push_back(run_scenario(spec.id, scenario_mode(spec.n), market, problem.prefs,
                                       problem.mortality, cfg.budget));
    }
    const auto dir = detail::prepare_output(out_dir);
    CsvWriter table(dir / "scenarios.csv", {"scenario", "mu", "r", "n", "outperformance"});
    for (std::size_t s = 0; s < reports.size(); ++s) {
        const auto& rep = reports[s];
        table.field(std::string_view(rep.id)).field(rep.mu).field(rep.r);
        if (cfg.scenarios[s].n == 0) {
            table.field(std::string_view("inf"));
        } else {
            table.field(cfg.scenarios[s].n);
        }
        table.field(rep.outperformance);
        table.end_row();
    }
    CsvWriter pairs(dir / "improvements.csv", {"scenario_a", "scenario_b", "improvement"});
    for (const auto& a : reports) {
        for (const auto& b : reports) {
            if (&a == &b) continue;
            pairs.field(std::string_view(a.id)).field(std::string_view(b.id));
            pairs.field(b.outperformance > -1.0 ? improvement(a.outperformance, b.outperformance)
                                                : std::numeric_limits<double>::quiet_NaN());
            pairs.end_row();
        }
    }
    return {table.path(), pairs.path()};
}

/// convergence.csv (n,z_n,abs_diff,bound), convergence_fit.csv with the
/// fitted decay, and fund_size.csv with the outperformance per fund size.
/// Returns the fit summary line through `summary` when given.
inline FileList cmd_converge(const RunConfig& cfg, const std::filesystem::path& out_dir,
                             std::string* summary = nullptr) {
    if (cfg.n_list.empty()) throw ConfigError("n_list: at least one fund size is required");
    const auto problem = build_problem(cfg);
    const auto rep = convergence_study(cfg.n_list, problem.grid, problem.market, problem.prefs,
                                       problem.mortality);
    const auto sizes = fund_size_study(cfg.n_list, problem.grid, problem.market, problem.prefs,
                                       problem.mortality, cfg.budget);
    const auto dir = detail::prepare_output(out_dir);

    CsvWriter conv(dir / "convergence.csv", {"n", "z_n", "abs_diff", "bound"});
    for (std::size_t i = 0; i < rep.n.size(); ++i) {
        conv.field(rep.n[i]).field(rep.z_n[i]).field(rep.abs_diff[i]).field(rep.bound[i]);
        conv.end_row();
    }
    CsvWriter fit(dir / "convergence_fit.csv",
                  {"z_inf", "calibration_n", "C", "exponent", "strictly_decreasing", "bound_holds"});
    fit.field(rep.z_inf)
        .field(rep.calibration_n)
        .field(rep.constant)
        .field(rep.exponent)
        .field(std::string_view(rep.strictly_decreasing ? "true" : "false"))
        .field(std::string_view(rep.bound_holds ? "true" : "false"));
    fit.end_row();
    CsvWriter fund(dir / "fund_size.csv", {"n", "outperformance"});
    for (std::size_t i = 0; i < sizes.n.size(); ++i) {
        fund.field(sizes.n[i]).field(sizes.outperformance[i]);
        fund.end_row();
    }
    fund.field(std::string_view("inf")).field(sizes.asymptote);
    fund.end_row();

    if (summary) {
        *summary = "fit: |z_n - z_inf| ~ " + format_number(std::exp(rep.log_intercept)) + " * n^" +
                   format_number(rep.exponent) + "; C = " + format_number(rep.constant) +
                   " at n = " + std::to_string(rep.calibration_n) +
                   (rep.bound_holds ? "; bound holds" : "; bound violated") +
                   (rep.strictly_decreasing ? "; strictly decreasing" : "; not strictly decreasing");
    }
    return {conv.path(), fit.path(), fund.path()};
}

}  // namespace pensionlab
