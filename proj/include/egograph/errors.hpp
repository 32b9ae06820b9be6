#ifndef EGOGRAPH_ERRORS_HPP
#define EGOGRAPH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace egograph {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file (missing file, unparseable line).
struct FormatError : Error {
    using Error::Error;
};

// Files parse individually but contradict each other.
struct ConsistencyError : Error {
    using Error::Error;
};

// Bad argument to an operation (out-of-range id, shape mismatch).
struct ArgumentError : Error {
    using Error::Error;
};

// Invalid model or run configuration.
struct ConfigError : Error {
    using Error::Error;
};

// Not enough data to carry out a statistical fit.
struct InsufficientDataError : Error {
    using Error::Error;
};

// Training diverged or could not proceed.
struct TrainingError : Error {
    using Error::Error;
};

// Operation called before its required state was prepared.
struct StateError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace egograph

#endif
