#pragma once

#include <stdexcept>
#include <string>

namespace casim {

/// Bad scenario / configuration / argument structure. CLI maps this to exit 2.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Mathematical domain violation (non-positive temperature, pressure, ...).
/// Treated like a validation problem by the CLI (exit 2).
class domain_error : public std::domain_error {
public:
    explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

/// Numerical scheme failed (instability, non-convergent interface iteration,
/// plane ran off the domain, ...). CLI maps this to exit 3.
class solver_error : public std::runtime_error {
public:
    explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

/// Input outside the validity range of a fitted correlation. Reported in the
/// run record; with --strict the CLI turns it into a hard stop (exit 4).
class correlation_range_error : public std::runtime_error {
public:
    explicit correlation_range_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace casim
