#pragma once

#include <stdexcept>
#include <string>

namespace hetcycle {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Affine fixed-point failures.
struct NoFixedPointError : Error {
    using Error::Error;
};
struct EveryPointFixedError : Error {
    using Error::Error;
};

// Root finding.
struct NoRootError : Error {
    using Error::Error;
};
struct DegenerateError : Error {
    using Error::Error;
};

// Model construction and stepping.
struct SpecViolationError : Error {
    using Error::Error;
};
struct NoBranchError : Error {
    using Error::Error;
};
struct DegenerateWordError : Error {
    using Error::Error;
};
struct BadWordError : Error {
    using Error::Error;
};
struct ParentNotAnchoredError : Error {
    using Error::Error;
};

// Tower construction and verification.
struct RejectedError : Error {
    using Error::Error;
};
struct InfeasibleError : Error {
    using Error::Error;
};
struct NonPositiveError : Error {
    using Error::Error;
};
struct BoundViolatedError : Error {
    using Error::Error;
};
struct DisjointnessError : Error {
    using Error::Error;
};
struct CountingShortfallError : Error {
    using Error::Error;
};
struct NoSuchNError : Error {
    NoSuchNError(const std::string& what, int estimate)
        : Error(what), required_depth_estimate(estimate) {}
    int required_depth_estimate = 0;
};

// Configuration.
struct ConfigParseError : Error {
    using Error::Error;
};
struct ConfigValidationError : Error {
    using Error::Error;
};

}  // namespace hetcycle
