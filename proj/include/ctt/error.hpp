#pragma once

#include <stdexcept>
#include <string>

namespace ctt {

/// Bad shapes, ranges or configuration values. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Degenerate or non-finite numerical input. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// A private payload crossed a link. Maps to CLI exit code 4.
class PrivacyError : public std::runtime_error {
public:
    explicit PrivacyError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed files.
class FormatError : public ConfigError {
public:
    explicit FormatError(const std::string& what) : ConfigError(what) {}
};

}  // namespace ctt
