#pragma once

#include <stdexcept>
#include <string>

namespace qsrc {

// Bad user-supplied values: config files, out-of-contract arguments.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidInputError : public std::runtime_error {
public:
    explicit InvalidInputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Integration blew its norm budget or produced non-finite values.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace qsrc
