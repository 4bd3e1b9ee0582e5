#pragma once

#include <stdexcept>
#include <string>

namespace dprime {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Argument large enough that the unscaled result would overflow a double.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Iterative method did not reach its tolerance within the iteration budget.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mesh generation or mesh validation failure.
class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The shifted pencil K - sigma*M is not positive definite.
class IndefiniteShiftError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) throw DomainError(message);
}

} // namespace detail
} // namespace dprime
