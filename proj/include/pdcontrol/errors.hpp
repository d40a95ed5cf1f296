#pragma once

#include <stdexcept>
#include <string>

namespace pdc {

/// Base class of every error thrown by the library.
struct Error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct InvalidGrid : Error
{
  using Error::Error;
};

struct ShapeError : Error
{
  using Error::Error;
};

/// Out-of-domain scalar parameter (bounds with a >= b, negative threshold, ...).
struct InvalidParameter : Error
{
  using Error::Error;
};

struct InvalidOperator : Error
{
  using Error::Error;
};

struct SolverFailure : Error
{
  SolverFailure(const std::string& what, double final_residual)
    : Error(what + " (relative residual " + std::to_string(final_residual) + ")")
    , residual(final_residual)
  {}
  double residual;
};

struct DiagnosticUnavailable : Error
{
  using Error::Error;
};

struct ConfigurationError : Error
{
  using Error::Error;
};

struct TrainingDiverged : Error
{
  TrainingDiverged(const std::string& what, int at_iteration)
    : Error(what + " at iteration " + std::to_string(at_iteration))
    , iteration(at_iteration)
  {}
  int iteration;
};

} // namespace pdc
