#pragma once

#include <stdexcept>
#include <string>

namespace hypflow {

// Common base so callers can catch everything the library throws.
struct HypflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user input: unparseable config, unknown keys, malformed speed strings.
struct ConfigError : HypflowError {
    using HypflowError::HypflowError;
};

// An API was called outside its domain of validity (wrong field/dimension
// combination, insufficient data, grid too coarse, run too short, ...).
struct PreconditionError : HypflowError {
    using HypflowError::HypflowError;
};

// A mathematical object was evaluated outside its domain (rho <= 0, H <= 0
// passed to a speed, ...).
struct DomainError : HypflowError {
    using HypflowError::HypflowError;
};

// A speed function produced a non-finite value on its required grid.
struct EvaluationError : HypflowError {
    using HypflowError::HypflowError;
};

// Numerical failures during time integration.  These map to CLI exit code 3.
struct FlowBreakdownError : HypflowError {
    int node;
    double H;
    FlowBreakdownError(int node_, double H_, const std::string& msg)
        : HypflowError(msg), node(node_), H(H_) {}
};

struct NumericBlowupError : HypflowError {
    using HypflowError::HypflowError;
};

struct StabilityError : HypflowError {
    using HypflowError::HypflowError;
};

// A diagnostic fit could not be performed (window empty, signal at noise
// floor, ...).
struct FitError : HypflowError {
    using HypflowError::HypflowError;
};

// A verified property failed: inadmissible speed, initial datum not mean
// convex.  Maps to CLI exit code 1.
struct VerificationError : HypflowError {
    using HypflowError::HypflowError;
};

} // namespace hypflow
