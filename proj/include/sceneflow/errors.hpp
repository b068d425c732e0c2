#pragma once

#include <stdexcept>
#include <string>

namespace sceneflow {

// Error taxonomy shared by the library and the CLI exit-code mapping.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller passed arguments that violate a documented precondition
// (dimension mismatch, non-positive threshold, ...).
struct UsageError : Error {
    using Error::Error;
};

// Mathematically invalid input to a single-point operation (z <= 0, NaN).
struct DomainError : Error {
    using Error::Error;
};

// A file failed to parse or serialize.
struct FormatError : Error {
    using Error::Error;
};

// File parsed but its content is unusable (wrong size, out-of-range values).
struct DataError : Error {
    using Error::Error;
};

// Not enough surviving measurements to run an estimator.
struct InsufficientDataError : Error {
    using Error::Error;
};

// An estimator ran but produced no acceptable model.
struct EstimationFailureError : Error {
    using Error::Error;
};

// Input geometry is rank-deficient for the requested fit.
struct DegenerateGeometryError : Error {
    using Error::Error;
};

}  // namespace sceneflow
