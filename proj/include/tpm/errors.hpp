#pragma once

#include <stdexcept>
#include <string>

namespace tpm {

/// Invalid parameters (bad grid, k < 1, malformed synth spec, ...).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Input data that violates an operation's precondition.
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// File could not be opened, read or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tpm
