#pragma once

#include <stdexcept>
#include <string>

namespace chartdate {

/// Input data is malformed or cannot support the requested computation
/// (empty corpus, undatable document, duplicate id, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed: zero denominators, singular systems,
/// weights that vanish everywhere.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violations on configuration values are reported with
// std::invalid_argument.

}  // namespace chartdate
