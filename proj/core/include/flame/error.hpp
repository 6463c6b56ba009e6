#pragma once

#include <stdexcept>
#include <string>

namespace flame {

// Raised for malformed inputs: bad files, schema violations, label values out
// of range, mismatched dimensions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an evaluation ends with nothing to score.
class EmptyEvaluation : public Error {
 public:
  using Error::Error;
};

}  // namespace flame
