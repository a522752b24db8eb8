#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qnet {

enum class ErrorKind {
    InvalidArgument,
    CapabilityViolation,
    NoFreeMemory,
    MismatchedEndpoints,
    NoCommonNode,
    PastEvent,
    LivelockGuard,
    ParseError,
    Io,
};

std::string_view to_string(ErrorKind kind);

// Precondition and contract failures. Protocol outcomes (drops, timeouts,
// exhausted retries) are returned as data instead.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ParseError : public Error {
public:
    ParseError(int line, const std::string& reason)
        : Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + reason),
          line_(line), reason_(reason) {}

    int line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    int line_;
    std::string reason_;
};

} // namespace qnet
