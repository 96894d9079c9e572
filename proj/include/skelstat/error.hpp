#ifndef SKELSTAT_ERROR_HPP
#define SKELSTAT_ERROR_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <utility>

namespace skelstat {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, violated preconditions, structural mismatch.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A numerical procedure failed on otherwise valid input.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap. Carries the last iterate.
class ConvergenceError : public NumericalError {
public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last, double objective)
      : NumericalError(what), last_iterate_(std::move(last)), objective_(objective) {}

  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }
  double objective() const { return objective_; }

private:
  Eigen::VectorXd last_iterate_;
  double objective_;
};

}  // namespace skelstat

#endif  // SKELSTAT_ERROR_HPP
