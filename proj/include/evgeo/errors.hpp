#pragma once

#include <stdexcept>
#include <string>

namespace evgeo {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file. Carries the offending path and 1-based line when known.
struct ParseError : Error {
    ParseError(const std::string& path, long line, const std::string& what)
        : Error(path + (line > 0 ? ":" + std::to_string(line) : "") + ": " + what),
          path(path),
          line(line) {}
    std::string path;
    long line = 0;
};

// Inputs that parse but violate a documented contract (ranges, duplicates, shapes).
struct ValidationError : Error {
    using Error::Error;
};

// Tensor/graph dimensions do not chain.
struct ShapeError : ValidationError {
    using ValidationError::ValidationError;
};

// Optimization diverged. epoch is the first epoch with a non-finite loss.
struct TrainingError : Error {
    TrainingError(int epoch, const std::string& what)
        : Error("epoch " + std::to_string(epoch) + ": " + what), epoch(epoch) {}
    int epoch = 0;
};

// An event cluster with no usable toponyms. Reported per event; never fatal to a run.
struct UnlocatableError : Error {
    using Error::Error;
};

// Metric inputs that cannot be compared (e.g. disjoint event ids).
struct EvalError : Error {
    using Error::Error;
};

}  // namespace evgeo
