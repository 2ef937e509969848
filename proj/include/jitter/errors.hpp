#pragma once

#include <stdexcept>
#include <string>

namespace jitter {

//! Base class of all errors raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! A parameter is outside its admissible range (e.g. theta >= 1, nu = 0).
class InvalidParameter : public Error
{
public:
  using Error::Error;
};

//! Malformed input file: missing values, non-integer discrete cells, bad
//! headers.
class IngestionError : public Error
{
public:
  using Error::Error;
};

//! Column layout does not match what an operation expects.
class SchemaError : public Error
{
public:
  using Error::Error;
};

//! A column has a single level or zero variance.
class DegenerateColumn : public Error
{
public:
  using Error::Error;
};

class InsufficientData : public Error
{
public:
  using Error::Error;
};

//! The conditioning density is (numerically) zero at the query point.
class NoLocalData : public Error
{
public:
  using Error::Error;
};

//! The conditioning event has probability zero under the model.
class UndefinedConditional : public Error
{
public:
  using Error::Error;
};

//! Quadrature did not converge; carries the best available estimate.
class NumericalFailure : public Error
{
public:
  NumericalFailure(const std::string& what, double best_estimate)
    : Error(what)
    , best_estimate_(best_estimate)
  {}

  double best_estimate() const { return best_estimate_; }

private:
  double best_estimate_;
};

//! The requested quantile level is not attained inside the search window.
class QuantileSearchError : public Error
{
public:
  QuantileSearchError(const std::string& what, double attained)
    : Error(what)
    , attained_(attained)
  {}

  //! largest CDF value reached in the window.
  double attained() const { return attained_; }

private:
  double attained_;
};

} // namespace jitter
