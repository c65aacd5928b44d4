// Error taxonomy shared by all modules. The CLI maps these to exit codes:
// DataError -> 2, NumericError -> 3, everything else -> 1.
#pragma once

#include <stdexcept>
#include <string>

namespace samn {

// Shape mismatch or malformed operand (e.g. matmul on incompatible shapes).
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration values (non-positive learning rate, bad ratios, ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unreadable or malformed input data (missing file, bad cell, tiny class).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values produced where finite ones are required (divergence).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation requires state that has not been established (untrained model,
// missing class prototype).
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace samn
