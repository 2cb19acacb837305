#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pinnlab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration, precondition or input schema.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File system or parse failure on an external file.
class IoError : public Error {
public:
    using Error::Error;
};

/// Non-finite value, singular division or non-convergence.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what, std::size_t node = npos)
        : Error(node == npos ? what : what + " (node " + std::to_string(node) + ")"), node_(node) {}

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    /// Tape index of the offending node, or npos when not tied to a tape.
    [[nodiscard]] std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

}  // namespace pinnlab
