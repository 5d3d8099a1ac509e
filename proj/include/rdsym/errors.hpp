#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rdsym {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class KindConflictError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t pos)
      : Error(what + " (at position " + std::to_string(pos) + ")"), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

class UnboundSymbolError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class CyclicBindingError : public Error {
 public:
  using Error::Error;
};

class OrderOverflowError : public Error {
 public:
  using Error::Error;
};

class NotPolynomialError : public Error {
 public:
  using Error::Error;
};

class ConstraintViolationError : public Error {
 public:
  using Error::Error;
};

class DegenerateOperatorError : public Error {
 public:
  using Error::Error;
};

class NotLieTailError : public Error {
 public:
  using Error::Error;
};

class NotFormPreservingError : public Error {
 public:
  using Error::Error;
};

class BranchMismatchError : public Error {
 public:
  using Error::Error;
};

class NoParticularSolutionError : public Error {
 public:
  using Error::Error;
};

class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, long step) : Error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

}  // namespace rdsym
