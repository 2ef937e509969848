#include "jitter/noise.hpp"

#include "jitter/errors.hpp"
#include "jitter/quadrature.hpp"
#include "jitter/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace jitter {

namespace {

// Continued fraction of the incomplete beta function (modified Lentz).
double
beta_continued_fraction(double a, double b, double x)
{
  constexpr int max_iter = 500;
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny)
    d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny)
      d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny)
      d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps)
      return h;
  }
  throw NumericalFailure("incomplete beta continued fraction did not converge",
                         h);
}

// I_x(a, a) for x strictly below the switch point 0.5
double
lower_tail(double a, double x)
{
  const double log_front = a * std::log(x) + a * std::log1p(-x) -
                           (2.0 * std::lgamma(a) - std::lgamma(2.0 * a));
  return std::exp(log_front) * beta_continued_fraction(a, a, x) / a;
}

} // namespace

double
beta_cdf(unsigned nu, double x)
{
  if (nu == 0)
    throw InvalidParameter("beta_cdf: nu must be a positive integer");
  if (std::isnan(x))
    return x;
  if (x <= 0.0)
    return 0.0;
  if (x >= 1.0)
    return 1.0;
  if (nu == 1)
    return x;
  if (x == 0.5)
    return 0.5;
  // switch point (nu + 1) / (2 nu + 2) = 0.5 for equal shapes
  const double a = static_cast<double>(nu);
  if (x < 0.5)
    return lower_tail(a, x);
  return 1.0 - lower_tail(a, 1.0 - x);
}

NoiseSpec::NoiseSpec(double theta, unsigned nu, std::size_t dims)
  : theta_(theta)
  , nu_(nu)
  , dims_(dims)
{
  if (!(theta >= 0.0 && theta < 1.0))
    throw InvalidParameter("noise theta must lie in [0, 1)");
  if (nu == 0)
    throw InvalidParameter("noise nu must be a positive integer");
}

double
eta_density(const NoiseSpec& spec, double x)
{
  const double ax = std::abs(x);
  const double theta = spec.theta();
  // closed interval, so that the unit plateau [-gamma1, gamma1] holds at its
  // endpoints; the open-interval indicator differs only on a null set
  if (theta == 0.0)
    return ax <= 0.5 ? 1.0 : 0.0;
  return beta_cdf(spec.nu(), (ax + 0.5) / theta + 0.5) -
         beta_cdf(spec.nu(), (ax - 0.5) / theta + 0.5);
}

Eigen::MatrixXd
sample_noise(const NoiseSpec& spec,
             std::uint64_t seed,
             std::size_t count,
             std::uint64_t stream)
{
  const auto rows = static_cast<Eigen::Index>(count);
  const auto cols = static_cast<Eigen::Index>(spec.dims());
  Eigen::MatrixXd out(rows, cols);
  RandomStream rng(seed, stream);

  // Beta(nu, nu) is the nu-th order statistic of 2 nu - 1 uniforms.
  const std::size_t pool_size = 2 * static_cast<std::size_t>(spec.nu()) - 1;
  std::vector<double> pool(pool_size);
  const auto middle = pool.begin() + (spec.nu() - 1);

  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double e = rng.uniform_open() - 0.5;
      if (spec.theta() > 0.0) {
        for (auto& u : pool)
          u = rng.uniform_open();
        std::nth_element(pool.begin(), middle, pool.end());
        e += spec.theta() * (*middle - 0.5);
      }
      out(i, j) = e;
    }
  }
  return out;
}

std::string
NoiseReport::to_text() const
{
  std::ostringstream os;
  os.precision(17);
  os << "value_at_zero: " << value_at_zero << '\n'
     << "plateau_ok: " << (plateau_ok ? "true" : "false") << '\n'
     << "support_ok: " << (support_ok ? "true" : "false") << '\n'
     << "mass: " << mass << '\n'
     << "mass_ok: " << (mass_ok ? "true" : "false") << '\n'
     << "max_abs_plateau_deviation: " << max_abs_plateau_deviation << '\n'
     << "max_abs_outside_support: " << max_abs_outside_support << '\n';
  return os.str();
}

NoiseReport
verify_membership(const NoiseSpec& spec,
                  const std::function<double(double)>& density,
                  std::size_t grid_points,
                  double tol)
{
  if (grid_points < 3)
    throw InvalidParameter("verify_membership: grid_points must be >= 3");
  const double g1 = spec.gamma1();
  const double g2 = spec.gamma2();
  const auto step = [&](double lo, double hi, std::size_t i) {
    return lo + (hi - lo) * static_cast<double>(i) /
                  static_cast<double>(grid_points - 1);
  };

  NoiseReport r{};
  r.value_at_zero = density(0.0);

  r.max_abs_plateau_deviation = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = step(-g1, g1, i);
    r.max_abs_plateau_deviation =
      std::max(r.max_abs_plateau_deviation, std::abs(density(x) - 1.0));
  }

  r.max_abs_outside_support = 0.0;
  const auto check_outside = [&](double x) {
    r.max_abs_outside_support =
      std::max(r.max_abs_outside_support, std::abs(density(x)));
  };
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = step(-1.0, 1.0, i);
    if (std::abs(x) > g2)
      check_outside(x);
  }
  for (double x : { -1.0, 1.0 })
    check_outside(x);

  const std::array<double, 4> breaks{ -g2, -g1, g1, g2 };
  try {
    r.mass = adaptive_integral(density, -1.0, 1.0, tol, breaks);
  } catch (const NumericalFailure& e) {
    r.mass = e.best_estimate();
  }

  r.plateau_ok = r.max_abs_plateau_deviation <= tol;
  r.support_ok = r.max_abs_outside_support <= tol;
  r.mass_ok = std::abs(r.mass - 1.0) <= tol;
  return r;
}

NoiseReport
verify_membership(const NoiseSpec& spec, std::size_t grid_points, double tol)
{
  return verify_membership(
    spec, [&spec](double x) { return eta_density(spec, x); }, grid_points, tol);
}

} // namespace jitter
