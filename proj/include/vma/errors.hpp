#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vma {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point lies outside the geometry's domain, or is not finite.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent sizes, non-finite inputs, malformed arguments.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Problem size above a configured solver cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Requested feature is outside what the implementation supports.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver gave up. Carries enough state to diagnose why.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::size_t bids, double last_epsilon,
              std::size_t unassigned)
      : Error(what), bids_(bids), last_epsilon_(last_epsilon), unassigned_(unassigned) {}

  std::size_t bids() const noexcept { return bids_; }
  double last_epsilon() const noexcept { return last_epsilon_; }
  std::size_t unassigned() const noexcept { return unassigned_; }

 private:
  std::size_t bids_;
  double last_epsilon_;
  std::size_t unassigned_;
};

/// Time step rejected by a stability limit.
class StepError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values detected in an evolving state.
class BlowUpError : public Error {
 public:
  using Error::Error;
};

/// Configuration text could not be parsed or validated.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace vma
