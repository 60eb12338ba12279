#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mbump {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on user-supplied input was violated (bad grid, bad
/// configuration, inadmissible parameters). The CLI maps this to exit code 2.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed: non-convergence, singular system,
/// loss of positivity. Carries the residual history when one exists.
class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& what, std::vector<double> history = {})
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace mbump
