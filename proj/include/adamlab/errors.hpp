#pragma once

#include <stdexcept>
#include <string>

namespace adamlab {

// Shape mismatch between a buffer and an incoming vector.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An operation was called outside its documented domain (step == 0, beta >= 1, ...).
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Inconsistent optimizer or experiment configuration.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-finite input or a value outside the mathematical domain of a formula.
struct NumericError : std::domain_error {
    using std::domain_error::domain_error;
};

// A numeric search could not bracket its target.
struct OracleFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File could not be read or written; the message carries the path.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace adamlab
