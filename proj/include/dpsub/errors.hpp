#pragma once

#include <stdexcept>
#include <string>

namespace dpsub {

/// Raised when an operation is asked to work beyond a hard size cap
/// (exhaustive subset loops, vertex enumeration, grid guards) or on an
/// instance lacking a structural property it needs (e.g. strong convexity).
class CapabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an iterative routine diverges or produces non-finite values.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& msg)
{
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_capability(bool cond, const std::string& msg)
{
    if (!cond) throw CapabilityError(msg);
}

} // namespace detail
} // namespace dpsub
