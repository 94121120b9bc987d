#pragma once

#include <stdexcept>
#include <string>

namespace tcfou {

/// Argument outside the mathematical domain of an operation (λ ≤ 0, t ≤ 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Caller broke a documented precondition (missing derivative samples,
/// non-uniform grid, mismatched boundary data, ...).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to reach its tolerance. Carries the best
/// estimate obtained so far.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double estimate, double error_estimate)
        : std::runtime_error(what), estimate_(estimate), error_estimate_(error_estimate) {}

    double estimate() const noexcept { return estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double estimate_;
    double error_estimate_;
};

}  // namespace tcfou
