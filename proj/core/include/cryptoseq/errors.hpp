#pragma once

#include <stdexcept>
#include <string>

namespace cryptoseq {

/// Incompatible matrix/vector dimensions.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Bad argument value (empty input, out-of-range rate, ...).
class ValueError : public std::invalid_argument {
public:
    explicit ValueError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed or inconsistent tabular data (duplicate columns, unknown column, bad CSV cell).
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid experiment configuration (unknown key, unparsable value).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-invertible MA polynomial or otherwise unstable model.
class StabilityError : public std::runtime_error {
public:
    explicit StabilityError(const std::string& what) : std::runtime_error(what) {}
};

/// Missing or unreadable/unwritable file.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cryptoseq
