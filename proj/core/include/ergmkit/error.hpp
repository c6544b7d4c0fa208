#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ergmkit {

// Invalid user input: malformed files, unknown labels, constraint violations.
// The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A graph space is too large to enumerate under the configured bounds.
class EnumerationBoundError : public InputError {
 public:
  using InputError::InputError;
};

// Statistical failure: nonexistent MLE, separation, singular information,
// degenerate simulation. The CLI maps this to exit code 2.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, std::vector<std::string> terms = {})
      : std::runtime_error(what), terms_(std::move(terms)) {}

  // Labels of the parameters implicated in the failure, if any.
  const std::vector<std::string>& terms() const noexcept { return terms_; }

 private:
  std::vector<std::string> terms_;
};

class SingularMatrixError : public NonConvergenceError {
 public:
  using NonConvergenceError::NonConvergenceError;
};

class DegeneracyError : public NonConvergenceError {
 public:
  using NonConvergenceError::NonConvergenceError;
};

}  // namespace ergmkit
