#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pensionlab {

/// Invalid parameters or configuration. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed mortality input. The message names the offending row.
class IngestionError : public std::runtime_error {
public:
    IngestionError(std::size_t row, const std::string& what)
        : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// A value recursion produced a non-finite or non-positive quantity.
/// Maps to CLI exit code 3.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t grid_index, std::size_t survivors, const std::string& what)
        : std::runtime_error(what + " (i=" + std::to_string(survivors) +
                             ", t index=" + std::to_string(grid_index) + ")"),
          grid_index_(grid_index), survivors_(survivors) {}

    std::size_t grid_index() const noexcept { return grid_index_; }
    /// Survivor count of the failing entry; 0 for the individual and infinite modes.
    std::size_t survivors() const noexcept { return survivors_; }

private:
    std::size_t grid_index_;
    std::size_t survivors_;
};

}  // namespace pensionlab
