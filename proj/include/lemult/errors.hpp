#pragma once

#include <stdexcept>
#include <string>

namespace lemult {

/// Argument outside the exterior region or another precondition violation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure could not deliver a trustworthy answer
/// (quadrature non-convergence, step underflow, unstable evolution).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lemult
