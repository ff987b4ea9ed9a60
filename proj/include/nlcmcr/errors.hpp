#pragma once

#include <stdexcept>
#include <string>

namespace nlcmcr {

// Invalid distribution or update parameters (nonpositive shapes, p outside (0,1), ...).
struct parameter_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed input text (bad header, non-binary list value, ...).
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally valid input that violates a dataset contract (all-zero row, empty table, ...).
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The sampler reached a numerically degenerate state (e.g. total miss
// probability at 1). `iteration` is filled in by the fit driver; -1 means
// the failing sweep index is unknown.
struct degeneracy_error : std::runtime_error {
    explicit degeneracy_error(const std::string& what, long long iteration = -1)
        : std::runtime_error(what), iteration(iteration) {}
    long long iteration;
};

}  // namespace nlcmcr
