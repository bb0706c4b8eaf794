#pragma once

#include <stdexcept>
#include <string>

namespace satenq {

// Dimension or shape disagreement between tensors, layers or batches.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// NaN/Inf where a finite value is required. Training code treats this as a
// catastrophic run failure, not a crash.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// API misuse: stepping a finished episode, sampling an empty buffer, ...
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// Invalid experiment configuration; message carries the offending field path.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace satenq
