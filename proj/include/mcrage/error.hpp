#pragma once

#include <stdexcept>
#include <string>

namespace mcrage {

// Base for every error the library raises. Messages carry the failing
// location (row/column/step) where the contract names one.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad run configuration (ranges, missing keys, malformed file). The CLI
// maps this to exit code 2; every other Error maps to exit code 1.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace mcrage
