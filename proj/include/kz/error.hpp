#pragma once

#include <stdexcept>
#include <string>

namespace kz {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input: malformed interval systems, out-of-range arguments.
struct ValidationError : Error {
  using Error::Error;
};

// log/sqrt of a series or function off its principal branch.
struct BranchError : Error {
  using Error::Error;
};

struct LpError : Error {
  using Error::Error;
};
struct LpInfeasible : LpError {
  using LpError::LpError;
};
struct LpUnbounded : LpError {
  using LpError::LpError;
};
struct LpIterationLimit : LpError {
  using LpError::LpError;
};

// Hankel/Gram matrix lost positive definiteness at a given degree.
struct RankError : Error {
  int degree;
  RankError(const std::string& what, int deg) : Error(what), degree(deg) {}
};

// Evaluation point too close to the support of an integral kernel.
struct ProximityError : Error {
  using Error::Error;
};

struct SingularError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

}  // namespace kz
