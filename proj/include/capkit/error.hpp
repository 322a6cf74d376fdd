#pragma once

#include <stdexcept>
#include <string>

namespace capkit {

/// Base error for all capkit failures. Messages carry the offending
/// document path where one exists (e.g. "objects[2].box: x1 <= x0").
class Error : public std::runtime_error {
public:
    explicit Error(std::string message) : std::runtime_error(std::move(message)) {}
};

/// Thrown when foreground extraction finds no object pixels. Callers treat
/// the case as unusable: it is reported and excluded, not scored.
class EmptyForegroundError : public Error {
public:
    explicit EmptyForegroundError(std::string message) : Error(std::move(message)) {}
};

/// Environment failure (unreadable input, unwritable output) as opposed
/// to a domain failure; the CLI maps these to exit code 2.
class EnvError : public Error {
public:
    explicit EnvError(std::string message) : Error(std::move(message)) {}
};

}  // namespace capkit
