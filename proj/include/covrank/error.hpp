#pragma once

#include <stdexcept>
#include <string>

namespace covrank {

// Malformed or inconsistent input: wrong shapes, non-finite cells, bad files.
class DataError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Matrix dimensions do not agree.
class DimensionError : public DataError {
public:
    using DataError::DataError;
};

// A numerical routine could not produce a usable answer (singular system,
// failed factorization, rank-deficient basis).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace covrank
