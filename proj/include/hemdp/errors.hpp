#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hemdp {

// Input file could not be parsed. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg, std::size_t line = 0)
        : std::runtime_error(line ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// A configuration value violates its contract. Carries the offending field name.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(const std::string& field, const std::string& msg)
        : std::invalid_argument(field + ": " + msg), field_(field) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// NaN/Inf appeared while integrating the thermal ODEs.
class NumericInstabilityError : public std::runtime_error {
public:
    explicit NumericInstabilityError(int substep)
        : std::runtime_error("non-finite state during integration at substep " +
                             std::to_string(substep)),
          substep_(substep) {}

    int substep() const { return substep_; }

private:
    int substep_;
};

// An abstract MDP model fails the spectral/validity condition (e.g. singular I - P).
class ModelValidityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hemdp
