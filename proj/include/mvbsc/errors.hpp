#pragma once

#include <stdexcept>
#include <string>

namespace mvbsc {

// Error taxonomy mirrors the CLI exit codes: config -> 2, ingestion -> 3,
// everything numeric/runtime -> 4.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class IngestionError : public std::runtime_error {
public:
    explicit IngestionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad arguments to a numeric kernel (shape mismatch, non-finite input,
// non-orthonormal columns, ...).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionError : public InputError {
public:
    explicit DimensionError(const std::string& msg) : InputError(msg) {}
};

// Runtime numerical failure: degenerate views, generation retries exhausted,
// rank-deficient fusion, non-monotone k-means step.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mvbsc
