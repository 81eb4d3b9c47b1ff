#pragma once

#include <stdexcept>
#include <string>

namespace wicksys {

/// A multi-index or signal does not fit the truncation policy it is used with.
struct PolicyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Weight product left the double range.
struct OverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A series or integral that the requested parameters make divergent
/// (weight order q <= 1, Neumann gain >= 1, ...).
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Weight orders violate the required gap k > l + 1.
struct OrderError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Two grid signals with incompatible time steps.
struct GridMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// An iterative solver ran out of iterations; the message carries the bracket.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A requested problem size exceeds the configured cap.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace wicksys
