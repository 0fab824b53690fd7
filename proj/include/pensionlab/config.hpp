#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pensionlab/core.hpp"
#include "pensionlab/errors.hpp"
#include "pensionlab/mortality.hpp"
#include "pensionlab/solver.hpp"

namespace pensionlab {

struct GompertzParams {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    friend bool operator==(const GompertzParams&, const GompertzParams&) = default;
};

/// Gompertz-Makeham hazard calibrated to a female member retiring at 65:
/// one-year death probability near 0.7% at 65, life expectancy near 23 years.
inline constexpr GompertzParams kDefaultGompertz{5e-4, 1e-5, 0.1};

struct MortalitySource {
    std::optional<std::string> csv;  ///< path, resolved against the config file's directory
    std::optional<GompertzParams> gompertz;
    friend bool operator==(const MortalitySource&, const MortalitySource&) = default;
};

struct SimulationSettings {
    std::size_t paths = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    friend bool operator==(const SimulationSettings&, const SimulationSettings&) = default;
};

/// One row of a scenario comparison. mu and r are real (inflation-adjusted)
/// rates; n = 0 denotes the infinite fund and n = 1 the individual.
struct ScenarioSpec {
    std::string id;
    double mu = 0.0;
    double r = 0.0;
    std::size_t n = 0;
    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// Everything one CLI run needs. Market rates are nominal; r_cpi is
/// subtracted from mu and r before solving.
struct RunConfig {
    double mu = 0.0;
    double r = 0.0;
    double sigma = 0.0;
    double r_cpi = 0.0;
    double alpha = -1.0;
    double rho = -1.0;
    double b = 0.0;
    double t0 = 0.0;
    double dt = 1.0;
    double T = 1.0;
    MortalitySource mortality;
    std::string mode = "infinite";
    double budget = 1.0;
    SimulationSettings simulation;
    std::string output = ".";
    std::vector<ScenarioSpec> scenarios;
    std::vector<std::size_t> n_list;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline CollectiveMode parse_mode(const std::string& text) {
    if (text == "individual") return CollectiveMode::individual();
    if (text == "infinite") return CollectiveMode::infinite();
    if (text.rfind("finite:", 0) == 0) {
        const std::string digits = text.substr(7);
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
            throw ConfigError("mode: expected finite:<n> with a positive integer n, got '" + text + "'");
        try {
            return CollectiveMode::finite(std::stoul(digits));
        } catch (const std::out_of_range&) {
            throw ConfigError("mode: fund size out of range in '" + text + "'");
        }
    }
    throw ConfigError("mode: expected individual, infinite or finite:<n>, got '" + text + "'");
}

inline CollectiveMode scenario_mode(std::size_t n) {
    if (n == 0) return CollectiveMode::infinite();
    if (n == 1) return CollectiveMode::individual();
    return CollectiveMode::finite(n);
}

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where,
                           std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!keys.count(key))
            throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
}

inline double number_at(const json& obj, const std::string& where, const char* key,
                        std::optional<double> fallback = std::nullopt) {
    const std::string name = where.empty() ? key : where + "." + key;
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError("missing key '" + name + "'");
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("key '" + name + "' must be a number");
    return v.get<double>();
}

inline std::uint64_t unsigned_at(const json& obj, const std::string& where, const char* key,
                                 std::uint64_t fallback) {
    const std::string name = where + "." + key;
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned()) throw ConfigError("key '" + name + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

inline std::size_t scenario_size(const json& v, const std::string& name) {
    if (v.is_string()) {
        if (v.get<std::string>() == "infinite") return 0;
        throw ConfigError("key '" + name + "' must be \"infinite\" or a positive integer");
    }
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() < 1)
        throw ConfigError("key '" + name + "' must be \"infinite\" or a positive integer");
    return v.get<std::size_t>();
}

}  // namespace detail

/// Parses the JSON configuration. Unknown keys are rejected so that typos
/// surface instead of silently falling back to defaults.
inline RunConfig parse_config(const nlohmann::json& j) {
    using detail::number_at;
    detail::reject_unknown(j, "", {"market", "preferences", "grid", "mortality", "mode", "budget",
                                   "simulation", "output", "scenarios", "n_list"});
    RunConfig cfg;
    if (j.contains("market")) detail::reject_unknown(j.at("market"), "market", {"mu", "r", "sigma", "r_cpi"});
    if (j.contains("preferences")) detail::reject_unknown(j.at("preferences"), "preferences", {"alpha", "rho", "b"});
    if (j.contains("grid")) detail::reject_unknown(j.at("grid"), "grid", {"t0", "dt", "T"});
    if (j.contains("mortality")) detail::reject_unknown(j.at("mortality"), "mortality", {"csv", "gompertz"});
    for (const char* required : {"market", "preferences", "grid", "mortality"})
        if (!j.contains(required)) throw ConfigError(std::string("missing key '") + required + "'");

    const auto& market = j.at("market");
    cfg.mu = number_at(market, "market", "mu");
    cfg.r = number_at(market, "market", "r");
    cfg.sigma = number_at(market, "market", "sigma");
    cfg.r_cpi = number_at(market, "market", "r_cpi", 0.0);

    const auto& prefs = j.at("preferences");
    cfg.alpha = number_at(prefs, "preferences", "alpha");
    cfg.rho = number_at(prefs, "preferences", "rho");
    cfg.b = number_at(prefs, "preferences", "b", 0.0);

    const auto& grid = j.at("grid");
    cfg.t0 = number_at(grid, "grid", "t0");
    cfg.dt = number_at(grid, "grid", "dt");
    cfg.T = number_at(grid, "grid", "T");

    const auto& mort = j.at("mortality");
    if (mort.contains("csv") == mort.contains("gompertz"))
        throw ConfigError("mortality: give exactly one of 'csv' or 'gompertz'");
    if (mort.contains("csv")) {
        if (!mort.at("csv").is_string()) throw ConfigError("key 'mortality.csv' must be a string");
        cfg.mortality.csv = mort.at("csv").get<std::string>();
    } else {
        const auto& g = mort.at("gompertz");
        detail::reject_unknown(g, "mortality.gompertz", {"a", "b", "c"});
        cfg.mortality.gompertz = GompertzParams{number_at(g, "mortality.gompertz", "a"),
                                                number_at(g, "mortality.gompertz", "b"),
                                                number_at(g, "mortality.gompertz", "c")};
    }

    if (j.contains("mode")) {
        if (!j.at("mode").is_string()) throw ConfigError("key 'mode' must be a string");
        cfg.mode = j.at("mode").get<std::string>();
    }
    cfg.budget = number_at(j, "", "budget", 1.0);

    if (j.contains("simulation")) {
        const auto& sim = j.at("simulation");
        detail::reject_unknown(sim, "simulation", {"paths", "seed", "threads"});
        cfg.simulation.paths = detail::unsigned_at(sim, "simulation", "paths", cfg.simulation.paths);
        cfg.simulation.seed = detail::unsigned_at(sim, "simulation", "seed", cfg.simulation.seed);
        cfg.simulation.threads = static_cast<unsigned>(
            detail::unsigned_at(sim, "simulation", "threads", cfg.simulation.threads));
    }
    if (j.contains("output")) {
        if (!j.at("output").is_string()) throw ConfigError("key 'output' must be a string");
        cfg.output = j.at("output").get<std::string>();
    }
    if (j.contains("scenarios")) {
        const auto& list = j.at("scenarios");
        if (!list.is_array()) throw ConfigError("key 'scenarios' must be an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string where = "scenarios[" + std::to_string(i) + "]";
            const auto& row = list.at(i);
            detail::reject_unknown(row, where, {"id", "mu", "r", "n"});
            ScenarioSpec spec;
            if (!row.contains("id") || !row.at("id").is_string())
                throw ConfigError("key '" + where + ".id' must be a string");
            spec.id = row.at("id").get<std::string>();
            spec.mu = number_at(row, where, "mu");
            spec.r = number_at(row, where, "r");
            if (!row.contains("n")) throw ConfigError("missing key '" + where + ".n'");
            spec.n = detail::scenario_size(row.at("n"), where + ".n");
            cfg.scenarios.push_back(std::move(spec));
        }
    }
    if (j.contains("n_list")) {
        const auto& list = j.at("n_list");
        if (!list.is_array()) throw ConfigError("key 'n_list' must be an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto& v = list.at(i);
            if (!v.is_number_unsigned() || v.get<std::uint64_t>() < 1)
                throw ConfigError("key 'n_list[" + std::to_string(i) + "]' must be a positive integer");
            cfg.n_list.push_back(v.get<std::size_t>());
        }
    }
    return cfg;
}

inline RunConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

/// Reads a config file; a relative mortality CSV path is resolved against
/// the file's directory.
inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig cfg = parse_config_text(buf.str());
    if (cfg.mortality.csv) {
        const std::filesystem::path csv(*cfg.mortality.csv);
        if (csv.is_relative()) cfg.mortality.csv = (path.parent_path() / csv).lexically_normal().string();
    }
    return cfg;
}

inline nlohmann::ordered_json to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["market"] = {{"mu", cfg.mu}, {"r", cfg.r}, {"sigma", cfg.sigma}, {"r_cpi", cfg.r_cpi}};
    j["preferences"] = {{"alpha", cfg.alpha}, {"rho", cfg.rho}, {"b", cfg.b}};
    j["grid"] = {{"t0", cfg.t0}, {"dt", cfg.dt}, {"T", cfg.T}};
    if (cfg.mortality.csv) {
        j["mortality"] = {{"csv", *cfg.mortality.csv}};
    } else if (cfg.mortality.gompertz) {
        const auto& g = *cfg.mortality.gompertz;
        j["mortality"] = {{"gompertz", {{"a", g.a}, {"b", g.b}, {"c", g.c}}}};
    }
    j["mode"] = cfg.mode;
    j["budget"] = cfg.budget;
    j["simulation"] = {{"paths", cfg.simulation.paths},
                       {"seed", cfg.simulation.seed},
                       {"threads", cfg.simulation.threads}};
    j["output"] = cfg.output;
    if (!cfg.scenarios.empty()) {
        auto rows = nlohmann::ordered_json::array();
        for (const auto& s : cfg.scenarios) {
            nlohmann::ordered_json row{{"id", s.id}, {"mu", s.mu}, {"r", s.r}};
            if (s.n == 0) {
                row["n"] = "infinite";
            } else {
                row["n"] = s.n;
            }
            rows.push_back(std::move(row));
        }
        j["scenarios"] = std::move(rows);
    }
    if (!cfg.n_list.empty()) j["n_list"] = cfg.n_list;
    return j;
}

/// Validated model inputs built from a config.
struct Problem {
    TimeGrid grid;
    MarketParams market;
    Preferences prefs;
    MortalityTable mortality;
    CollectiveMode mode;
};

inline MarketParams real_market(const RunConfig& cfg, double mu_nominal, double r_nominal) {
    MarketParams m{mu_nominal - cfg.r_cpi, r_nominal - cfg.r_cpi, cfg.sigma};
    m.validate();
    return m;
}

inline MortalityTable load_mortality(const RunConfig& cfg, const TimeGrid& grid) {
    if (cfg.mortality.csv) {
        std::ifstream in(*cfg.mortality.csv, std::ios::binary);
        if (!in) throw ConfigError("mortality.csv: cannot open " + *cfg.mortality.csv);
        return load_mortality_csv(in, grid);
    }
    if (!cfg.mortality.gompertz) throw ConfigError("mortality: no source given");
    const auto& g = *cfg.mortality.gompertz;
    return gompertz_makeham(g.a, g.b, g.c, grid);
}

inline Problem build_problem(const RunConfig& cfg) {
    if (!(cfg.budget > 0.0) || !std::isfinite(cfg.budget)) throw ConfigError("budget must be positive");
    if (!std::isfinite(cfg.r_cpi)) throw ConfigError("market.r_cpi must be finite");
    const auto grid = make_time_grid(cfg.t0, cfg.dt, cfg.T);
    const auto market = real_market(cfg, cfg.mu, cfg.r);
    const auto prefs = make_preferences(cfg.alpha, cfg.rho, cfg.b, grid.dt());
    const auto mode = parse_mode(cfg.mode);
    auto mortality = load_mortality(cfg, grid);
    return Problem{grid, market, prefs, std::move(mortality), mode};
}

}  // namespace pensionlab
