#pragma once

#include <stdexcept>
#include <string>

namespace mwtgc {

/// Malformed or inconsistent input data: files, id references, split layouts.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values or degenerate statistics encountered mid-computation.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mwtgc
