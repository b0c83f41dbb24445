#pragma once

#include <stdexcept>
#include <string>

namespace cyldens {

//! Malformed or unusable input data (bad rows, ties, unsorted timestamps).
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

//! A model could not be fitted (degenerate sample, bandwidth selection failure).
class FitError : public std::runtime_error {
public:
  explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

//! Numerical breakdown during evaluation or integration.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace cyldens
