#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace carpetlab {

/// A parameter violates an operation's precondition (n < 3, lambda = 0, ...).
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The McMullen map was evaluated at its pole z = 0.
class PoleError : public std::domain_error {
public:
    PoleError() : std::domain_error("pole: McMullen map evaluated at z = 0") {}
};

/// A request would exceed a configured resource cap.
class ResourceError : public std::runtime_error {
public:
    ResourceError(const std::string& what, std::string required)
        : std::runtime_error(what + " (required: " + required + ")"),
          required_(std::move(required)) {}

    const std::string& required() const noexcept { return required_; }

private:
    std::string required_;
};

/// Input data could not be used (empty raster, unreadable file, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace carpetlab
