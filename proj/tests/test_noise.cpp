#include "jitter/errors.hpp"
#include "jitter/noise.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <doctest.h>

#include <cmath>

using namespace jitter;

namespace {

// I_x(nu, nu) for integer nu is the upper binomial tail
// P(Bin(2 nu - 1, x) >= nu); exact finite sum.
double
beta_cdf_binomial_tail(unsigned nu, double x)
{
  const unsigned m = 2 * nu - 1;
  double sum = 0.0;
  for (unsigned j = nu; j <= m; ++j) {
    double c = 1.0;
    for (unsigned i = 0; i < j; ++i)
      c = c * (m - i) / (i + 1);
    sum += c * std::pow(x, j) * std::pow(1.0 - x, m - j);
  }
  return sum;
}

} // namespace

TEST_CASE("beta_cdf closed forms")
{
  CHECK(beta_cdf(1, 0.3) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(beta_cdf(5, 0.5) == 0.5);
  // Beta(2, 2): 3x^2 - 2x^3
  CHECK(std::abs(beta_cdf(2, 0.25) - 0.15625) <= 1e-12);
  CHECK(beta_cdf(3, -0.2) == 0.0);
  CHECK(beta_cdf(3, 1.7) == 1.0);
  CHECK_THROWS_AS(beta_cdf(0, 0.5), InvalidParameter);
}

TEST_CASE("beta_cdf agrees with two independent routes")
{
  for (unsigned nu : { 1u, 2u, 3u, 5u, 8u, 13u }) {
    for (int i = 0; i <= 200; ++i) {
      const double x = i / 200.0;
      const double v = beta_cdf(nu, x);
      CHECK(std::abs(v - beta_cdf_binomial_tail(nu, x)) <= 1e-12);
      CHECK(std::abs(v - boost::math::ibeta(double(nu), double(nu), x)) <= 1e-12);
    }
  }
}

TEST_CASE("beta_cdf symmetry and monotonicity")
{
  for (unsigned nu : { 1u, 2u, 5u, 10u }) {
    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double x = i / 1000.0;
      const double v = beta_cdf(nu, x);
      CHECK(v >= prev);
      prev = v;
      CHECK(std::abs(v + beta_cdf(nu, 1.0 - x) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("noise spec validation")
{
  CHECK_THROWS_AS(NoiseSpec(1.0, 5), InvalidParameter);
  CHECK_THROWS_AS(NoiseSpec(-0.1, 5), InvalidParameter);
  CHECK_THROWS_AS(NoiseSpec(0.5, 0), InvalidParameter);
  const NoiseSpec s(0.8, 5);
  CHECK(s.gamma1() == doctest::Approx(0.1));
  CHECK(s.gamma2() == doctest::Approx(0.9));
  for (double theta : { 0.0, 0.3, 0.99 }) {
    const NoiseSpec t(theta, 2);
    CHECK(t.gamma1() > 0.0);
    CHECK(t.gamma1() <= 0.5);
    CHECK(t.gamma2() >= 0.5);
    CHECK(t.gamma2() < 1.0);
  }
}

TEST_CASE("eta_density examples")
{
  CHECK(eta_density(NoiseSpec(0.0, 1), 0.49) == 1.0);
  CHECK(eta_density(NoiseSpec(0.0, 1), 0.5) == 1.0);
  CHECK(eta_density(NoiseSpec(0.0, 1), 0.5000001) == 0.0);
  CHECK(eta_density(NoiseSpec(0.8, 5), 0.0) == 1.0);
  CHECK(std::abs(eta_density(NoiseSpec(0.8, 5), 0.5) - 0.5) <= 1e-12);
}

TEST_CASE("eta_density properties over a parameter grid")
{
  for (double theta : { 0.0, 0.2, 0.4, 0.8, 0.95 }) {
    for (unsigned nu : { 1u, 2u, 5u }) {
      const NoiseSpec s(theta, nu);
      CHECK(eta_density(s, 0.0) == 1.0);
      for (int i = -300; i <= 300; ++i) {
        const double x = i / 200.0;
        const double v = eta_density(s, x);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v == eta_density(s, -x));
        if (std::abs(x) <= s.gamma1())
          CHECK(std::abs(v - 1.0) <= 1e-12);
        if (std::abs(x) > s.gamma2())
          CHECK(v == 0.0);
        else if (std::abs(x) == s.gamma2() && theta > 0.0)
          CHECK(v <= 1e-15);
      }
    }
  }
}

TEST_CASE("sample_noise moments and support")
{
  const std::uint64_t seed = 20240917;

  SUBCASE("uniform case")
  {
    const NoiseSpec s(0.0, 1, 2);
    const auto e = sample_noise(s, seed, 10000);
    REQUIRE(e.rows() == 10000);
    REQUIRE(e.cols() == 2);
    const double sigma = std::sqrt(1.0 / 12.0);
    for (Eigen::Index j = 0; j < 2; ++j)
      CHECK(std::abs(e.col(j).mean()) <= 3.0 * sigma / std::sqrt(10000.0));
  }

  SUBCASE("support of every family member")
  {
    for (double theta : { 0.0, 0.4, 0.8 }) {
      for (unsigned nu : { 1u, 2u, 5u }) {
        const NoiseSpec s(theta, nu);
        const auto e = sample_noise(s, seed, 100000);
        CHECK(e.minCoeff() > -s.gamma2());
        CHECK(e.maxCoeff() < s.gamma2());
      }
    }
  }

  SUBCASE("variance of U + theta (B - 0.5)")
  {
    const NoiseSpec s(0.8, 5);
    const std::size_t n = 200000;
    const Eigen::ArrayXd e = sample_noise(s, seed, n).col(0).array();
    const double mean = e.mean();
    const double var = (e - mean).square().sum() / double(n - 1);
    const double m4 = (e - mean).pow(4).mean();
    // Beta(nu, nu) variance 1 / (4 (2 nu + 1))
    const double expected = 1.0 / 12.0 + 0.64 / 44.0;
    const double se = std::sqrt((m4 - var * var) / double(n));
    CHECK(std::abs(var - expected) <= 4.0 * se);
  }
}

TEST_CASE("sample_noise determinism and streams")
{
  const NoiseSpec s(0.8, 5, 3);
  const auto a = sample_noise(s, 7, 500);
  const auto b = sample_noise(s, 7, 500);
  CHECK(a == b);
  const auto c = sample_noise(s, 7, 500, 1);
  CHECK(a != c);
  const auto d = sample_noise(s, 8, 500);
  CHECK(a != d);
  CHECK(sample_noise(s, 7, 0).rows() == 0);
}

TEST_CASE("verify_membership")
{
  SUBCASE("uniform noise")
  {
    const auto r = verify_membership(NoiseSpec(0.0, 1), 101, 1e-12);
    CHECK(r.value_at_zero == 1.0);
    CHECK(std::abs(r.mass - 1.0) <= 1e-8);
    CHECK(r.ok());
  }
  SUBCASE("smooth noise")
  {
    const auto r = verify_membership(NoiseSpec(0.8, 5), 101, 1e-12);
    CHECK(r.plateau_ok);
    CHECK(r.support_ok);
    CHECK(r.ok());
  }
  SUBCASE("corrupted density is flagged")
  {
    const NoiseSpec s(0.8, 5);
    const auto r = verify_membership(
      s, [&](double x) { return 0.9 * eta_density(s, x); }, 101, 1e-12);
    CHECK(r.value_at_zero == doctest::Approx(0.9));
    CHECK_FALSE(r.plateau_ok);
    CHECK_FALSE(r.ok());
    CHECK(r.to_text().find("plateau_ok: false") != std::string::npos);
  }
  SUBCASE("density with support too wide is flagged")
  {
    const NoiseSpec s(0.4, 2);
    const auto r = verify_membership(
      s, [](double x) { return std::abs(x) < 0.75 ? 1.0 / 1.5 : 0.0; }, 101, 1e-12);
    CHECK_FALSE(r.support_ok);
    CHECK_FALSE(r.ok());
  }
  CHECK_THROWS_AS(verify_membership(NoiseSpec(0.0, 1), 2, 1e-12), InvalidParameter);
}
