#ifndef SYMDIRECT_ERRORS_HPP
#define SYMDIRECT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace symdirect {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression or problem-file text. `position` is a byte offset
/// into the offending text (or a line number for problem files).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at " + std::to_string(position) + ")"), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownIdentifier : public Error {
 public:
  explicit UnknownIdentifier(const std::string& name)
      : Error("unknown identifier '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class NotPolynomial : public Error {
 public:
  explicit NotPolynomial(const std::string& var) : Error("not polynomial in " + var) {}
};

class EvalError : public Error {
 public:
  using Error::Error;
};

/// Input is well formed but outside what the algorithms support.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// Invalid problem data (dimension mismatch, duplicate pins, empty horizon...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A solver ran but could not produce an answer.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace symdirect

#endif
