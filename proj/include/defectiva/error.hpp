#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace defectiva {

/// Argument outside the mathematical domain of a function (negative time,
/// probability level past the defective mass, invalid parameter).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Adaptive quadrature ran out of refinement depth before meeting its tolerance.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inadmissible input data. `row` is a zero-based index for
/// in-memory data and a 1-based line number for files; -1 when unknown.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::size_t row)
        : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}
    explicit DataError(const std::string& what) : std::runtime_error(what) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_ = static_cast<std::size_t>(-1);
};

/// A single observation produced a non-finite log-likelihood term.
class LikelihoodError : public std::runtime_error {
public:
    LikelihoodError(const std::string& what, std::size_t observation)
        : std::runtime_error("observation " + std::to_string(observation) + ": " + what),
          observation_(observation) {}

    std::size_t observation() const noexcept { return observation_; }

private:
    std::size_t observation_;
};

/// Invalid configuration (sampler settings, prior box, study grid, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// MCMC chain failed a diagnostic (no accepted moves, zero variance, too short).
class DiagnosticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace defectiva
