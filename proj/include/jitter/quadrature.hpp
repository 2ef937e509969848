#pragma once

#include <functional>
#include <span>

namespace jitter {

struct QuadratureOptions
{
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_subdivisions = 5000;
};

//! Globally adaptive 7/15-point Gauss-Kronrod integration of f over [a, b].
//!
//! `breaks` are points where f may be non-smooth; those inside (a, b) split
//! the initial partition. Throws NumericalFailure (carrying the current
//! estimate) when the error target is not met within `max_subdivisions`
//! bisections.
double
adaptive_integral(const std::function<double(double)>& f,
                  double a,
                  double b,
                  const QuadratureOptions& opts = {},
                  std::span<const double> breaks = {});

inline double
adaptive_integral(const std::function<double(double)>& f,
                  double a,
                  double b,
                  double tol,
                  std::span<const double> breaks = {})
{
  return adaptive_integral(f, a, b, QuadratureOptions{ tol }, breaks);
}

//! Central difference of order 1 or 2 with step h.
double
finite_difference(const std::function<double(double)>& f,
                  double x,
                  int order,
                  double h);

} // namespace jitter
