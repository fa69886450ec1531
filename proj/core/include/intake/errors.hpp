#pragma once

#include <stdexcept>
#include <string>

namespace intake {

// Base for everything thrown by this library. The CLI maps subtrees of this
// hierarchy onto distinct exit codes, so new error types should pick the
// branch that matches how a caller has to react, not how the failure looks.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad user-supplied configuration: unknown keys, out-of-range values,
// inconsistent option combinations.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input data (JSON that does not parse, missing required fields).
class ParseError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Structurally valid data that violates a domain rule, e.g. an entity whose
// category is not in the registry, or probabilities outside [0,1].
class ValidationError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Filesystem trouble: file absent, unreadable, unwritable.
class IoError : public Error {
public:
    using Error::Error;
};

// A remote dependency (LLM endpoint) failed or answered garbage.
class RemoteError : public Error {
public:
    using Error::Error;
};

// A numeric argument outside its mathematical domain (e.g. a probability
// outside [0,1]).
class DomainError : public Error {
public:
    using Error::Error;
};

// An internal invariant broke. Indicates a bug in this library, not in the
// caller's input; never rely on catching it for control flow.
class ContractViolation : public Error {
public:
    using Error::Error;
};

} // namespace intake
