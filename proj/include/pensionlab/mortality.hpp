#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pensionlab/binomial.hpp"
#include "pensionlab/core.hpp"
#include "pensionlab/errors.hpp"

namespace pensionlab {

/// Distribution of the time of death over a grid. p[k] is the probability
/// of dying at grid point k (a member dying at t still consumes at t).
/// Death is certain by the horizon, so the final point carries the residual
/// mass and has survival probability 0.
class MortalityTable {
public:
    static MortalityTable from_pmf(const TimeGrid& grid, std::vector<double> p) {
        if (p.size() != grid.size())
            throw ConfigError("mortality: pmf has " + std::to_string(p.size()) +
                              " entries but the grid has " + std::to_string(grid.size()));
        double total = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (!(p[k] >= 0.0) || !std::isfinite(p[k]))
                throw ConfigError("mortality: p[" + std::to_string(k) + "] is not a probability");
            total += p[k];
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw ConfigError("mortality: pmf sums to " + std::to_string(total) + ", not 1");
        if (!(p.back() > 0.0))
            throw ConfigError("mortality: survival reaches zero before the final grid point");

        MortalityTable table;
        table.grid_ = grid;
        const std::size_t n = p.size();
        table.tail_.assign(n, 0.0);
        double acc = 0.0;
        for (std::size_t k = n; k-- > 0;) {
            acc += p[k];
            table.tail_[k] = acc;
        }
        // Normalise so that Pr(tau >= t0) is exactly one.
        for (auto& v : table.tail_) v /= acc;
        table.s_.assign(n, 0.0);
        for (std::size_t k = 0; k + 1 < n; ++k) table.s_[k] = table.tail_[k + 1] / table.tail_[k];
        table.p_ = std::move(p);
        return table;
    }

    /// Builds the pmf from per-step survival probabilities of the non-final
    /// grid points; the final point absorbs all remaining mass.
    static MortalityTable from_step_survival(const TimeGrid& grid, std::span<const double> surv) {
        if (surv.size() + 1 != grid.size())
            throw ConfigError("mortality: need one survival probability per non-final grid point");
        std::vector<double> p(grid.size());
        double alive = 1.0;
        for (std::size_t k = 0; k < surv.size(); ++k) {
            if (!(surv[k] >= 0.0 && surv[k] <= 1.0))
                throw ConfigError("mortality: survival probability outside [0,1] at index " +
                                  std::to_string(k));
            p[k] = alive * (1.0 - surv[k]);
            alive *= surv[k];
        }
        p.back() = alive;
        return from_pmf(grid, std::move(p));
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return p_.size(); }
    std::span<const double> pmf() const noexcept { return p_; }
    std::span<const double> survival() const noexcept { return s_; }
    /// Pr(tau >= t_k).
    double alive_probability(std::size_t k) const { return tail_.at(k); }

    /// One-step survival s_k = Pr(tau > t_k | tau >= t_k).
    double survival_prob(std::size_t k) const {
        if (k >= s_.size()) throw DomainError("mortality: grid index out of range");
        return s_[k];
    }

private:
    MortalityTable() = default;

    TimeGrid grid_;
    std::vector<double> p_;
    std::vector<double> tail_;
    std::vector<double> s_;
};

inline double survival_prob(const MortalityTable& table, std::size_t k) {
    return table.survival_prob(k);
}

/// Gompertz-Makeham hazard a + b exp(c t), with t the grid time (age),
/// integrated exactly over each step.
inline MortalityTable gompertz_makeham(double a, double b, double c, const TimeGrid& grid) {
    if (!(a >= 0.0) || !(b >= 0.0) || !(c >= 0.0) || !std::isfinite(a) || !std::isfinite(b) ||
        !std::isfinite(c))
        throw ConfigError("gompertz: parameters a, b, c must be finite and non-negative");
    const double dt = grid.dt();
    std::vector<double> surv(grid.size() - 1);
    for (std::size_t k = 0; k < surv.size(); ++k) {
        const double t = grid.time(k);
        const double gompertz =
            c == 0.0 ? b * dt : b * std::exp(c * t) * std::expm1(c * dt) / c;
        surv[k] = std::exp(-(a * dt + gompertz));
        if (!(surv[k] > 0.0))
            throw ConfigError("gompertz: survival probability is zero at t=" +
                              std::to_string(t) + ", before the final grid point");
    }
    return MortalityTable::from_step_survival(grid, surv);
}

/// Actuarial price of one unit paid at every grid date the member is alive
/// (payment made in the period of death), discounted at rate r.
inline double annuity_factor(const MortalityTable& table, double r) {
    const auto& grid = table.grid();
    double sum = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k)
        sum += std::exp(-r * grid.elapsed(k)) * table.alive_probability(k);
    return sum;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Reads annual `age,qx` rows and resamples them onto the grid, whose times
/// are ages. Survival over a step is the product of (1-qx)^overlap over the
/// integer ages the step overlaps, which is exact at integer boundaries.
inline MortalityTable load_mortality_csv(std::istream& in, const TimeGrid& grid) {
    std::string line;
    std::size_t row = 0;
    bool have_header = false;
    std::vector<double> ages;
    std::vector<double> qx;
    while (std::getline(in, line)) {
        ++row;
        auto text = detail::trim(line);
        if (row == 1 && text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF)
            text.remove_prefix(3);  // UTF-8 BOM
        if (text.empty()) continue;
        if (!have_header) {
            if (text != "age,qx") throw IngestionError(row, "expected header 'age,qx'");
            have_header = true;
            continue;
        }
        const auto comma = text.find(',');
        if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos)
            throw IngestionError(row, "expected exactly two fields");
        double age = 0.0;
        double q = 0.0;
        if (!detail::parse_double(text.substr(0, comma), age) || age != std::floor(age))
            throw IngestionError(row, "age is not an integer");
        if (!detail::parse_double(text.substr(comma + 1), q))
            throw IngestionError(row, "qx is not a number");
        if (!(q >= 0.0 && q <= 1.0)) throw IngestionError(row, "qx outside [0,1]");
        if (!ages.empty() && age != ages.back() + 1.0)
            throw IngestionError(row, "ages must increase by one per row");
        ages.push_back(age);
        qx.push_back(q);
    }
    if (!have_header) throw IngestionError(row + 1, "missing header 'age,qx'");
    if (ages.empty()) throw IngestionError(row + 1, "no data rows");

    const double first_needed = std::floor(grid.t0());
    const double last_needed = std::ceil(grid.horizon()) - 1.0;
    if (ages.front() > first_needed)
        throw IngestionError(2, "ages start at " + std::to_string(ages.front()) +
                                    " but the grid starts at " + std::to_string(grid.t0()));
    if (ages.back() < last_needed)
        throw IngestionError(row + 1, "ages end at " + std::to_string(ages.back()) +
                                          " but the grid runs to " +
                                          std::to_string(grid.horizon()));

    const auto row_of = [&](double age) {
        return static_cast<std::size_t>(age - ages.front());
    };
    std::vector<double> surv(grid.size() - 1);
    for (std::size_t k = 0; k < surv.size(); ++k) {
        const double lo = grid.time(k);
        const double hi = grid.time(k + 1);
        double log_s = 0.0;
        for (double a = std::floor(lo); a < hi; a += 1.0) {
            const double overlap = std::min(hi, a + 1.0) - std::max(lo, a);
            if (overlap <= 0.0) continue;
            const double q = qx[row_of(a)];
            if (q == 1.0) {
                log_s = -std::numeric_limits<double>::infinity();
                break;
            }
            log_s += overlap * std::log1p(-q);
        }
        surv[k] = std::exp(log_s);
        if (!(surv[k] > 0.0))
            throw IngestionError(row_of(std::floor(lo)) + 2,
                                 "certain death at age " + std::to_string(lo) +
                                     ", before the final grid point");
    }
    return MortalityTable::from_step_survival(grid, surv);
}

/// Writes a table on an annual grid starting at an integer age as `age,qx`
/// with qx = 1 - s. Values are printed in shortest round-trip form.
inline void write_mortality_csv(std::ostream& out, const MortalityTable& table) {
    const auto& grid = table.grid();
    if (grid.dt() != 1.0 || grid.t0() != std::floor(grid.t0()))
        throw ConfigError("mortality: CSV output requires an annual grid at integer ages");
    out << "age,qx\n";
    char buf[64];
    for (std::size_t k = 0; k < table.size(); ++k) {
        const double q = grid.is_last(k) ? 1.0 : 1.0 - table.survival_prob(k);
        const auto res = std::to_chars(buf, buf + sizeof buf, q);
        out << static_cast<long long>(grid.time(k)) << ','
            << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
    }
}

}  // namespace pensionlab
