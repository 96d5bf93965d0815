#pragma once

#include <stdexcept>
#include <string>

namespace delaygame {

/// Argument outside the domain of an operation (time off the horizon,
/// history lookup outside [-h, 0), mismatched dimensions, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Non-finite right-hand side met while stepping a motion.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double t) : std::runtime_error(what), time_(t) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Search tree larger than the configured node budget.
class ResourceError : public std::runtime_error {
public:
    ResourceError(const std::string& what, double required, double budget)
        : std::runtime_error(what), required_(required), budget_(budget) {}
    double required() const noexcept { return required_; }
    double budget() const noexcept { return budget_; }

private:
    double required_;
    double budget_;
};

/// Functional has no ci-gradient at the requested position.
class NotDifferentiableError : public DomainError {
public:
    using DomainError::DomainError;
};

} // namespace delaygame
