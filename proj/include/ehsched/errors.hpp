#pragma once

#include <stdexcept>
#include <string>

namespace ehsched {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Vector/matrix dimensions disagree with the instance (K slots, N users).
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Some user receives zero bits, so the log-utility is -inf.
class DegenerateScheduleError : public Error {
 public:
  using Error::Error;
};

// Solver input violates a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Instance cannot be set up (zero-gain user, starved user, ...).
class SetupError : public Error {
 public:
  using Error::Error;
};

class StarvedUserError : public SetupError {
 public:
  using SetupError::SetupError;
};

// Brute-force oracle asked for an instance it cannot enumerate.
class SizeError : public Error {
 public:
  using Error::Error;
};

}  // namespace ehsched
