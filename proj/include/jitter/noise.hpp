#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

namespace jitter {

//! Regularized incomplete beta function I_x(nu, nu) (the Beta(nu, nu) cdf).
//!
//! Arguments outside [0, 1] are clamped. Throws InvalidParameter for nu = 0.
double
beta_cdf(unsigned nu, double x);

//! Parameters of the noise U + theta * (B - 0.5), U ~ Unif(-0.5, 0.5),
//! B ~ Beta(nu, nu).
//!
//! The resulting density equals one on [-gamma1, gamma1] and vanishes outside
//! (-gamma2, gamma2), with gamma1 = (1 - theta) / 2 and
//! gamma2 = (1 + theta) / 2. The same univariate density is used for each of
//! the `dims` jittered coordinates.
class NoiseSpec
{
public:
  NoiseSpec(double theta, unsigned nu, std::size_t dims = 1);

  double theta() const { return theta_; }
  unsigned nu() const { return nu_; }
  std::size_t dims() const { return dims_; }

  double gamma1() const { return 0.5 * (1.0 - theta_); }
  double gamma2() const { return 0.5 * (1.0 + theta_); }

  //! copy of this spec jittering a different number of coordinates.
  NoiseSpec with_dims(std::size_t dims) const { return { theta_, nu_, dims }; }

  bool operator==(const NoiseSpec&) const = default;

private:
  double theta_;
  unsigned nu_;
  std::size_t dims_;
};

//! Univariate noise density eta at x.
double
eta_density(const NoiseSpec& spec, double x);

//! `count` x `spec.dims()` matrix of independent noise draws from the stream
//! (seed, stream). Identical arguments give bit-identical output.
Eigen::MatrixXd
sample_noise(const NoiseSpec& spec,
             std::uint64_t seed,
             std::size_t count,
             std::uint64_t stream = 0);

struct NoiseReport
{
  double value_at_zero;
  bool plateau_ok;
  bool support_ok;
  double mass;
  double max_abs_plateau_deviation;
  double max_abs_outside_support;
  bool mass_ok;

  bool ok() const
  {
    return value_at_zero == 1.0 && plateau_ok && support_ok && mass_ok;
  }

  //! plain `key: value` block, one entry per line.
  std::string to_text() const;
};

//! Checks an arbitrary density against the noise class conditions of `spec`
//! (unit value at zero, unit plateau on [-gamma1, gamma1], zero outside
//! [-gamma2, gamma2], unit mass). `grid_points` >= 3 points on [-1, 1].
NoiseReport
verify_membership(const NoiseSpec& spec,
                  const std::function<double(double)>& density,
                  std::size_t grid_points,
                  double tol);

//! verify_membership applied to eta_density(spec, .).
NoiseReport
verify_membership(const NoiseSpec& spec, std::size_t grid_points, double tol);

} // namespace jitter
