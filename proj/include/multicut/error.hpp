#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mc {

// Base class of every error raised by the library. The C API maps each
// subclass to one status code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Caller passed arguments that violate an operation's precondition
// (length mismatch, i == j, out-of-range node, ...).
class InputError : public Error {
public:
  using Error::Error;
};

// Exhaustive routines refuse inputs above their size limit.
class SizeGuardError : public InputError {
public:
  using InputError::InputError;
};

class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// A labeling that is not a multicut, or a partition whose clusters are not
// connected in the graph.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

// Object used outside its contract (e.g. model fed an unnormalized instance).
class ContractViolation : public Error {
public:
  using Error::Error;
};

class TimeoutError : public Error {
public:
  using Error::Error;
};

class NumericError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace mc
