#pragma once

#include <stdexcept>
#include <string>

namespace hypedyn {

// Bad input: out-of-domain parameters, malformed files, schema violations.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation that could not produce a trustworthy number.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Eigenvalue modulus within tolerance of the unit circle.
class BoundaryCase : public NumericalError {
public:
    using NumericalError::NumericalError;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) {
        throw InvalidArgument(what);
    }
}

}  // namespace detail
}  // namespace hypedyn
