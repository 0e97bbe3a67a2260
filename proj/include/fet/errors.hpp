#pragma once

#include <stdexcept>
#include <string>

namespace fet {

// Invalid numeric argument: probability outside [0,1], bad sample size, etc.
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Bad request from a caller: unknown preset, size cap exceeded, malformed config.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// A model object violates a structural property (e.g. a chain that is not absorbing).
class StructuralError : public std::runtime_error {
public:
    explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fet
