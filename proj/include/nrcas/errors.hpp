#pragma once

#include <stdexcept>
#include <string>

namespace nrcas {

// Bad argument values or dimension mismatches in library calls.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input files (excitations, geometry, masks).
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Scenario configuration problems (unknown keys, wrong types, bad values).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Failed decompositions, zero denominators and failed cross-checks.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace nrcas
