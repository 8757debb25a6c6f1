#pragma once

#include <stdexcept>
#include <string>

namespace seqsense {

/// Invalid parameters or a malformed experiment description.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested operation is not defined for the given law or model.
class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A formula was evaluated outside its domain (wrong drift sign, singular exponent, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Caller broke a precondition that is not a configuration problem.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace seqsense
