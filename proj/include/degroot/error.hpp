#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace degroot {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates an operation's precondition (bad dimensions, invalid network,
// non-finite values, unknown generator kind, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A quantity is undefined for the given input, e.g. zero bias diversity.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations)
      : Error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}

  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace degroot
