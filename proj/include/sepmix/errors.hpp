// Error categories. The CLI maps each one to its exit code.
#pragma once

#include <stdexcept>
#include <string>

namespace sepmix {

// a checked numerical or structural property failed
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// state space or work budget exceeded
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad user input: parameters, files, ranges
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum ExitCode : int { exit_ok = 0, exit_invariant = 2, exit_capacity = 3, exit_config = 4 };

}  // namespace sepmix
