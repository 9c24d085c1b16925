#pragma once

#include <stdexcept>
#include <string>

namespace sciu {

// Bad dimensions, out-of-range hyperparameters, inconsistent shapes.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed input file; message carries the line number.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input parsed but violates a dataset invariant (duplicate id, label range...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Run finished in a state with nothing left to train on (e.g. every sample pruned).
class DegenerateRunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite loss or parameters during training.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Metric requested on data that cannot define it (empty confusion matrix, missing oracle fields).
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sciu
