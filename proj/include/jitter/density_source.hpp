#pragma once

#include <span>
#include <vector>

namespace jitter {

//! Closed interval [lo, hi].
struct Interval
{
  double lo;
  double hi;
};

//! A joint density of jittered data, as seen by the regression functionals.
//!
//! Implemented by the fitted kernel density estimator and by the analytic
//! jittered densities of synthetic models, so that both can be plugged into
//! the same functional layer.
class DensitySource
{
public:
  virtual ~DensitySource() = default;

  //! number of coordinates of the joint density.
  virtual std::size_t dim() const = 0;

  //! Density of the sub-vector `active` at `point` (a full-length vector;
  //! entries of non-active coordinates are ignored). The remaining coordinates
  //! are integrated out.
  virtual double density(std::span<const double> point,
                         std::span<const std::size_t> active) const = 0;

  //! whether coordinate `col` is an integer variable before jittering.
  virtual bool is_discrete(std::size_t col) const = 0;

  //! range of the observations (or support) along `col`.
  virtual Interval observed_range(std::size_t col) const = 0;

  //! interval holding all of the density's mass along `col`.
  virtual Interval mass_window(std::size_t col) const = 0;

  //! points in [lo, hi] where the density along `col` may have kinks.
  virtual std::vector<double> break_hints(std::size_t col,
                                          double lo,
                                          double hi) const
  {
    (void)col;
    (void)lo;
    (void)hi;
    return {};
  }

  //! full-dimensional density.
  double density(std::span<const double> point) const;
};

//! integer +/- offset kink locations within [lo, hi] (offsets 0, +-g1, +-g2).
std::vector<double>
integer_kink_hints(double lo, double hi, double gamma1, double gamma2);

} // namespace jitter
