#pragma once

#include <stdexcept>
#include <string>

namespace gs {

// Base for all library failures that should surface as a runtime error
// (CLI exit code 1).
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Bad configuration or unusable input file (CLI exit code 2).
class ConfigError : public Error {
  public:
    using Error::Error;
};

// Malformed cycle/CSV input; carries the 1-based line number.
class ParseError : public Error {
  public:
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

// Least-squares fit could not be performed (rank-deficient design matrix).
class FitError : public Error {
  public:
    using Error::Error;
};

// No feasible gear sequence exists for a scenario, or a simulation had to
// apply an infeasible control.
class InfeasibleError : public Error {
  public:
    using Error::Error;
};

// Training diverged; carries the epoch at which the loss became non-finite.
class TrainError : public Error {
  public:
    TrainError(const std::string& msg, int epoch)
        : Error(msg + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
    int epoch() const { return epoch_; }

  private:
    int epoch_;
};

}  // namespace gs
