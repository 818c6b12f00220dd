#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace reliance {

/// Input outside the legal domain of an operation. Messages name the field.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Structurally invalid configuration (bad key, length mismatch, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised instead of silently truncating an oversized strategy space.
class EnumerationCapError : public std::runtime_error {
public:
    EnumerationCapError(std::uint64_t count, std::uint64_t cap)
        : std::runtime_error("strategy enumeration refused: C(n,k) = " + std::to_string(count) +
                             " exceeds cap " + std::to_string(cap)),
          count_(count) {}

    std::uint64_t count() const noexcept { return count_; }

private:
    std::uint64_t count_;
};

class UnsupportedFamilyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace reliance
