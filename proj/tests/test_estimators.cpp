#include "jitter/errors.hpp"
#include "jitter/estimators.hpp"
#include "jitter/oracle.hpp"
#include "jitter/quadrature.hpp"
#include "jitter/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace jitter;

namespace {

std::shared_ptr<const MixedDataset>
binomial_data(std::size_t n, std::uint64_t seed)
{
  const SyntheticMixedModel m(DiscretePmf::binomial(4, 0.3));
  return std::make_shared<const MixedDataset>(
    std::vector<ColumnSchema>{ { "z", ColumnKind::discrete_ordered } }, m.sample(n, seed));
}

std::shared_ptr<const MixedDataset>
mixed_data(std::size_t n, std::uint64_t seed)
{
  const SyntheticMixedModel m(DiscretePmf::binomial(4, 0.3), GaussianConditional{ 0.0, 1.0, 1.0, 0.0 });
  return std::make_shared<const MixedDataset>(
    std::vector<ColumnSchema>{ { "z", ColumnKind::discrete_ordered }, { "x", ColumnKind::continuous } },
    m.sample(n, seed));
}

// (x, y) with x continuous; y filled by `f`
template<class F>
std::shared_ptr<const MixedDataset>
regression_data(std::size_t n, std::uint64_t seed, F f)
{
  RandomStream rs(seed, 0);
  Eigen::MatrixXd v(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    v(i, 0) = 2.0 * rs.normal();
    v(i, 1) = f(v(i, 0), rs);
  }
  return std::make_shared<const MixedDataset>(
    std::vector<ColumnSchema>{ { "x", ColumnKind::continuous }, { "y", ColumnKind::continuous } }, v);
}

// weighted least squares on the raw jittered covariates, solved by QR
double
wls_intercept(const LocLinModel& m, std::size_t r, const std::vector<double>& point)
{
  const auto& reps = m.replicates()[r].values;
  const auto& cov = m.covariates();
  const auto n = reps.rows();
  const auto d = static_cast<Eigen::Index>(cov.size());
  Eigen::MatrixXd X(n, d + 1);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    double wi = 1.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double diff = reps(i, static_cast<Eigen::Index>(cov[k])) - point[k];
      X(i, k + 1) = diff;
      const double u = diff / (m.bandwidths()(k) * m.transform().scale(k));
      wi *= m.kernel() == Kernel::gaussian ? std::exp(-0.5 * u * u)
                                           : std::max(0.0, 1.0 - u * u);
    }
    w(i) = std::sqrt(wi);
  }
  const Eigen::MatrixXd A = w.asDiagonal() * X;
  const Eigen::VectorXd b = w.asDiagonal() * m.response(r);
  return A.colPivHouseholderQr().solve(b)(0);
}

} // namespace

TEST_CASE("select_bandwidth")
{
  const double b100 = select_bandwidth(100, 1)(0);
  CHECK(std::abs(b100 - std::pow(4.0 / 3.0, 0.2) * std::pow(100.0, -0.2)) <= 1e-15);
  CHECK(std::abs(b100 - 0.421685) <= 1e-6);
  CHECK(std::abs(select_bandwidth(400, 1)(0) / b100 - std::pow(4.0, -0.2)) <= 1e-14);
  const auto b2 = select_bandwidth(100, 2);
  REQUIRE(b2.size() == 2);
  CHECK(b2(0) == b2(1));
  CHECK(std::abs(b2(0) - std::pow(1.0, 1.0 / 6.0) * std::pow(100.0, -1.0 / 6.0)) <= 1e-15);
  CHECK_THROWS_AS(select_bandwidth(1, 1), InsufficientData);
  CHECK(select_bandwidth(*mixed_data(50, 1)).size() == 2);
}

TEST_CASE("kernel names")
{
  CHECK(kernel_from_string("gaussian") == Kernel::gaussian);
  CHECK(to_string(Kernel::epanechnikov) == "epanechnikov");
  CHECK_THROWS_AS(kernel_from_string("triweight"), InvalidParameter);
}

TEST_CASE("fit_kde")
{
  const auto data = mixed_data(200, 3);
  const NoiseSpec noise(0.8, 5, 1);

  SUBCASE("single replicate is the plain jitter")
  {
    const auto m = fit_kde(data, noise, { Kernel::gaussian, 1, 42 });
    REQUIRE(m.num_jitters() == 1);
    CHECK(m.replicates()[0].values == jitter::jitter(data, noise, 42, 0).values);
    CHECK(m.bandwidths() == select_bandwidth(200, 2));
  }
  SUBCASE("bandwidth override is stored verbatim")
  {
    FitOptions o;
    o.bandwidth = Eigen::Vector2d(0.5, 0.25);
    const auto m = fit_kde(data, noise, o);
    CHECK(m.bandwidths() == Eigen::Vector2d(0.5, 0.25));
    o.bandwidth = Eigen::Vector2d(0.5, -1.0);
    CHECK_THROWS_AS(fit_kde(data, noise, o), InvalidParameter);
    o.bandwidth = Eigen::VectorXd::Constant(3, 0.5);
    CHECK_THROWS_AS(fit_kde(data, noise, o), InvalidParameter);
  }
  SUBCASE("errors")
  {
    CHECK_THROWS_AS(fit_kde(data, noise, { Kernel::gaussian, 0, 1 }), InvalidParameter);
    CHECK_THROWS_AS(fit_kde(data, NoiseSpec(0.8, 5, 2), {}), SchemaError);
    CHECK_THROWS_AS(fit_kde(binomial_data(1, 1), noise, {}), InsufficientData);
  }
  SUBCASE("same seed gives the same model")
  {
    const auto a = fit_kde(data, noise, { Kernel::gaussian, 3, 8 });
    const auto b = fit_kde(data, noise, { Kernel::gaussian, 3, 8 });
    for (std::size_t r = 0; r < 3; ++r)
      CHECK(a.replicates()[r].values == b.replicates()[r].values);
    const double p[] = { 1.0, 0.5 };
    CHECK(a.eval(p) == b.eval(p));
  }
}

TEST_CASE("kde_eval")
{
  SUBCASE("matches a direct sum on the original scale")
  {
    const auto data = mixed_data(300, 5);
    const NoiseSpec noise(0.4, 2, 1);
    for (auto kernel : { Kernel::gaussian, Kernel::epanechnikov }) {
      const auto m = fit_kde(data, noise, { kernel, 1, 2 });
      const auto& v = m.replicates()[0].values;
      const double h0 = m.bandwidths()(0) * m.transform().scale(0);
      const double h1 = m.bandwidths()(1) * m.transform().scale(1);
      const double p[] = { 1.3, 0.7 };
      double s = 0.0;
      for (Eigen::Index i = 0; i < v.rows(); ++i) {
        const double u0 = (v(i, 0) - p[0]) / h0;
        const double u1 = (v(i, 1) - p[1]) / h1;
        if (kernel == Kernel::gaussian)
          s += std::exp(-0.5 * (u0 * u0 + u1 * u1)) / (2.0 * M_PI);
        else
          s += 0.5625 * std::max(0.0, 1.0 - u0 * u0) * std::max(0.0, 1.0 - u1 * u1);
      }
      s /= double(v.rows()) * h0 * h1;
      CHECK(std::abs(m.eval(p) - s) <= 1e-13 * s);
    }
  }
  SUBCASE("far away points")
  {
    const auto m = fit_kde(binomial_data(500, 1), NoiseSpec(0.8, 5, 1));
    const double far[] = { 30.0 };
    CHECK(m.eval(far) < 1e-10);
    CHECK(m.eval(far) >= 0.0);
  }
  SUBCASE("point dimension is checked")
  {
    const auto m = fit_kde(binomial_data(50, 1), NoiseSpec(0.8, 5, 1));
    const double p[] = { 1.0, 2.0 };
    CHECK_THROWS_AS(m.eval(p), InvalidParameter);
  }
}

TEST_CASE("kde integrates to one and is nonnegative")
{
  for (auto kernel : { Kernel::gaussian, Kernel::epanechnikov }) {
    for (std::uint64_t seed : { 1u, 2u, 3u }) {
      const auto m = fit_kde(binomial_data(500, seed), NoiseSpec(0.8, 5, 1), { kernel, 1, seed });
      const auto w = m.mass_window(0);
      auto f = [&](double z) {
        const double p[] = { z };
        const double v = m.eval(p);
        CHECK(v >= 0.0);
        return v;
      };
      const auto hints = m.break_hints(0, w.lo, w.hi);
      const double mass = adaptive_integral(f, w.lo, w.hi, 1e-9, hints);
      CHECK(std::abs(mass - 1.0) <= 1e-3);
    }
  }

  SUBCASE("two dimensions")
  {
    const auto m = fit_kde(mixed_data(500, 9), NoiseSpec(0.8, 5, 1), { Kernel::gaussian, 1, 9 });
    const auto wz = m.mass_window(0);
    const auto wx = m.mass_window(1);
    const double mass = adaptive_integral(
      [&](double z) {
        return adaptive_integral(
          [&](double x) {
            const double p[] = { z, x };
            return m.eval(p);
          },
          wx.lo, wx.hi, 1e-7);
      },
      wz.lo, wz.hi, 1e-6);
    CHECK(std::abs(mass - 1.0) <= 1e-3);
  }
}

TEST_CASE("replicate averaging")
{
  const auto data = mixed_data(400, 11);
  const auto m = fit_kde(data, NoiseSpec(0.8, 5, 1), { Kernel::gaussian, 5, 77 });
  RandomStream rs(5, 0);
  for (int k = 0; k < 100; ++k) {
    const double p[] = { 4.0 * rs.uniform_open() - 0.5, 3.0 * rs.normal() };
    double mean = 0.0;
    for (std::size_t r = 0; r < 5; ++r)
      mean += m.eval_replicate(r, p);
    mean /= 5.0;
    CHECK(std::abs(m.eval(p) - mean) <= 1e-14 * std::max(1.0, mean));
  }
  CHECK_THROWS_AS(m.eval_replicate(5, std::vector<double>{ 0.0, 0.0 }), InvalidParameter);
}

TEST_CASE("kde marginal density")
{
  const auto m = fit_kde(mixed_data(300, 4), NoiseSpec(0.8, 5, 1), { Kernel::gaussian, 2, 4 });
  const std::size_t z_only[] = { 0 };
  const double p[] = { 1.4, 123.0 };
  const double marginal = m.density(p, z_only);
  const auto wx = m.mass_window(1);
  const double integrated = adaptive_integral(
    [&](double x) {
      const double q[] = { 1.4, x };
      return m.eval(q);
    },
    wx.lo, wx.hi, 1e-12);
  CHECK(std::abs(marginal - integrated) <= 1e-9);
  CHECK(m.is_discrete(0));
  CHECK_FALSE(m.is_discrete(1));
}

TEST_CASE("local linear regression")
{
  const NoiseSpec none(0.8, 5, 0);

  SUBCASE("constants and lines are reproduced")
  {
    const auto c = regression_data(300, 1, [](double, RandomStream&) { return 2.0; });
    const auto l = regression_data(300, 2, [](double x, RandomStream&) { return 3.0 * x; });
    for (auto kernel : { Kernel::gaussian, Kernel::epanechnikov }) {
      const auto mc = fit_loclin(c, 1, none, { { kernel, 1, 0 } });
      const auto ml = fit_loclin(l, 1, none, { { kernel, 1, 0 } });
      for (double x0 : { -3.0, -0.5, 0.0, 1.7, 4.0 }) {
        const double p[] = { x0 };
        CHECK(std::abs(mc.eval(p) - 2.0) <= 1e-10);
        CHECK(std::abs(ml.eval(p) - 3.0 * x0) <= 1e-8);
      }
    }
  }
  SUBCASE("matches a brute force weighted least squares fit")
  {
    const auto data = mixed_data(500, 12);
    for (auto kernel : { Kernel::gaussian, Kernel::epanechnikov }) {
      const auto m = fit_loclin(data, 1, NoiseSpec(0.8, 5, 1), { { kernel, 2, 6 } });
      CHECK(m.covariates() == std::vector<std::size_t>{ 0 });
      for (double z : { 0.0, 0.3, 1.0, 2.5 }) {
        const std::vector<double> p = { z };
        double mean = 0.0;
        for (std::size_t r = 0; r < 2; ++r) {
          const double ref = wls_intercept(m, r, p);
          CHECK(std::abs(m.eval_replicate(r, p) - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
          mean += ref / 2.0;
        }
        CHECK(std::abs(m.eval(p) - mean) <= 1e-9 * std::max(1.0, std::abs(mean)));
      }
    }
  }
  SUBCASE("discrete covariate, quadratic response")
  {
    const SyntheticMixedModel sm(DiscretePmf::binomial(4, 0.3));
    const Eigen::MatrixXd z = sm.sample(8000, 31);
    RandomStream rs(31, 7);
    Eigen::MatrixXd v(8000, 2);
    for (Eigen::Index i = 0; i < 8000; ++i) {
      v(i, 0) = z(i, 0);
      v(i, 1) = z(i, 0) * z(i, 0) + rs.normal();
    }
    const auto data = std::make_shared<const MixedDataset>(
      std::vector<ColumnSchema>{ { "z", ColumnKind::discrete_ordered }, { "y", ColumnKind::continuous } }, v);
    const auto m = fit_loclin(data, 1, NoiseSpec(0.8, 5, 1), { { Kernel::gaussian, 1, 31 } });
    const double p[] = { 2.0 };
    const double oracle = true_conditional(
      SyntheticMixedModel(DiscretePmf::binomial(4, 0.3), GaussianConditional{ 0.0, 0.0, 1.0, 0.0 }),
      functional::Mean{}, condition::DiscreteValue{ 2 }) + 4.0;
    CHECK(std::abs(m.eval(p) - oracle) <= 0.15);
  }
  SUBCASE("response handling")
  {
    const auto data = mixed_data(100, 8);
    const auto cont = fit_loclin(data, 1, NoiseSpec(0.8, 5, 1));
    CHECK(cont.response(0) == data->values().col(1));
    const auto disc = fit_loclin(data, 0, NoiseSpec(0.8, 5, 1));
    CHECK(disc.response(0) == data->values().col(0));
    LocLinOptions o;
    o.jitter_response = true;
    const auto jit = fit_loclin(data, 0, NoiseSpec(0.8, 5, 1), o);
    CHECK(jit.response(0) == jit.replicates()[0].values.col(0));
    CHECK(jit.response(0) != data->values().col(0));
  }
  SUBCASE("same seed refit is identical")
  {
    const auto data = mixed_data(100, 8);
    const auto a = fit_loclin(data, 1, NoiseSpec(0.8, 5, 1), { { Kernel::gaussian, 2, 3 } });
    const auto b = fit_loclin(data, 1, NoiseSpec(0.8, 5, 1), { { Kernel::gaussian, 2, 3 } });
    const double p[] = { 1.5 };
    CHECK(a.eval(p) == b.eval(p));
    CHECK(a.replicates()[1].values == b.replicates()[1].values);
  }
  SUBCASE("errors")
  {
    const auto one_col = binomial_data(50, 1);
    CHECK_THROWS_AS(fit_loclin(one_col, 0, NoiseSpec(0.8, 5, 1)), SchemaError);
    CHECK_THROWS_AS(fit_loclin(mixed_data(2, 1), 1, NoiseSpec(0.8, 5, 1)), InsufficientData);
    CHECK_THROWS_AS(fit_loclin(mixed_data(30, 1), 2, NoiseSpec(0.8, 5, 1)), SchemaError);

    LocLinOptions o;
    o.kernel = Kernel::epanechnikov;
    o.bandwidth = Eigen::VectorXd::Constant(1, 0.05);
    const auto m = fit_loclin(regression_data(50, 4, [](double x, RandomStream&) { return x; }), 1,
                              none, o);
    const double far[] = { 100.0 };
    CHECK_THROWS_AS(m.eval(far), NoLocalData);
  }
  SUBCASE("ties in a covariate fall back to the ridge")
  {
    // every weighted point sits on the same covariate value
    Eigen::MatrixXd v(6, 2);
    v << 0, 1, 0, 3, 0, 2, 10, 5, 10, 6, 10, 7;
    const auto data = std::make_shared<const MixedDataset>(
      std::vector<ColumnSchema>{ { "x", ColumnKind::continuous }, { "y", ColumnKind::continuous } }, v);
    LocLinOptions o;
    o.kernel = Kernel::epanechnikov;
    o.bandwidth = Eigen::VectorXd::Constant(1, 0.1);
    const auto m = fit_loclin(data, 1, none, o);
    const double p[] = { 0.0 };
    CHECK(std::abs(m.eval(p) - 2.0) <= 1e-6);
  }
}
