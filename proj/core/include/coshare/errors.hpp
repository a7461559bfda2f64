#pragma once

#include <stdexcept>
#include <string>

namespace coshare {

/// Invalid configuration or infeasible parameters. CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Unreadable or malformed input data. CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// An operation was called with inputs outside its domain
/// (degenerate samples, out-of-range day, undefined metric value).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// A two-party protocol run could not complete (channel failure,
/// parameter mismatch, unexpected message).
class ProtocolError : public std::runtime_error {
public:
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace coshare
