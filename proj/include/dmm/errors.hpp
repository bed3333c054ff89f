#pragma once

#include <stdexcept>

namespace dmm {

/// A caller broke a documented precondition (bad index, length mismatch, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A configuration object failed validation.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numeric input outside the domain of an operation (e.g. log of a nonpositive value).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace dmm
