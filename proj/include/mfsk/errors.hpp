#pragma once

#include <stdexcept>
#include <string>

namespace mfsk {

// Argument outside the domain of an operation (bad symbol index, negative
// probability, empty input). std::domain_error already has the right meaning.
using DomainError = std::domain_error;

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Operation invoked in the wrong object state (e.g. backward without forward).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Malformed or truncated dataset/model file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite loss or similar numerical breakdown during training.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

}  // namespace mfsk
