#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kdvlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A quantity diverges at a degenerate parameter value (e.g. K(s) at s = 1).
class SaturationError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to converge.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history = {})
      : Error(what), history_(std::move(history)) {}
  /// Residual norms (or last iterate, depending on the solver) recorded before giving up.
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

/// The characteristic equation has several real roots (inside the fold after breakup).
class MultivaluedError : public Error {
 public:
  MultivaluedError(const std::string& what, std::vector<double> roots)
      : Error(what), roots_(std::move(roots)) {}
  /// Characteristic parameters xi of every real root, ascending.
  const std::vector<double>& roots() const noexcept { return roots_; }

 private:
  std::vector<double> roots_;
};

/// NaN/Inf appeared during time integration.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Grid too coarse for the requested dispersion parameter.
class ResolutionError : public Error {
 public:
  ResolutionError(const std::string& what, std::size_t suggested)
      : Error(what), suggested_(suggested) {}
  std::size_t suggested_points() const noexcept { return suggested_; }

 private:
  std::size_t suggested_;
};

/// No solution exists for the requested input (e.g. a point outside the Whitham zone).
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

/// A self-convergence or consistency gate failed inside an experiment.
class GateError : public Error {
 public:
  using Error::Error;
};

}  // namespace kdvlab
