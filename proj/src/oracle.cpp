#include "jitter/oracle.hpp"

#include "jitter/errors.hpp"
#include "jitter/rng.hpp"

#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace jitter {

// ---------------------------------------------------------------------------
// DiscretePmf

DiscretePmf::DiscretePmf(long support_min, std::vector<double> probabilities)
  : support_min_(support_min)
  , probs_(std::move(probabilities))
{
  if (probs_.empty())
    throw InvalidParameter("pmf needs at least one support point");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0))
      throw InvalidParameter("pmf probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidParameter("pmf probabilities must sum to one");
}

DiscretePmf
DiscretePmf::binomial(unsigned size, double prob)
{
  if (!(prob >= 0.0 && prob <= 1.0))
    throw InvalidParameter("binomial prob must lie in [0, 1]");
  std::vector<double> p(size + 1);
  double coef = 1.0;
  for (unsigned k = 0; k <= size; ++k) {
    p[k] = coef * std::pow(prob, k) * std::pow(1.0 - prob, size - k);
    coef = coef * (size - k) / (k + 1);
  }
  return { 0, std::move(p) };
}

DiscretePmf
DiscretePmf::bernoulli(double prob)
{
  if (!(prob >= 0.0 && prob <= 1.0))
    throw InvalidParameter("bernoulli prob must lie in [0, 1]");
  return { 0, { 1.0 - prob, prob } };
}

DiscretePmf
DiscretePmf::poisson_truncated(double lambda, unsigned max_value)
{
  if (!(lambda > 0.0))
    throw InvalidParameter("poisson lambda must be positive");
  std::vector<double> p(max_value + 1);
  double term = 1.0;
  for (unsigned k = 0; k <= max_value; ++k) {
    p[k] = term;
    term *= lambda / (k + 1);
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p)
    v /= total;
  return { 0, std::move(p) };
}

double
DiscretePmf::pmf(double z) const
{
  if (z != std::floor(z) || z < support_min_ || z > support_max())
    return 0.0;
  return probs_[static_cast<std::size_t>(static_cast<long>(z) - support_min_)];
}

double
DiscretePmf::cdf(double z) const
{
  if (z < support_min_)
    return 0.0;
  if (z >= support_max())
    return 1.0;
  const auto last = static_cast<long>(std::floor(z)) - support_min_;
  double sum = 0.0;
  for (long k = 0; k <= last; ++k)
    sum += probs_[static_cast<std::size_t>(k)];
  return sum;
}

double
DiscretePmf::mean() const
{
  double m = 0.0;
  for (std::size_t k = 0; k < probs_.size(); ++k)
    m += static_cast<double>(support_min_ + static_cast<long>(k)) * probs_[k];
  return m;
}

long
DiscretePmf::quantile(double alpha) const
{
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidParameter("quantile level must lie in [0, 1]");
  double cum = 0.0;
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    cum += probs_[k];
    if (cum >= alpha)
      return support_min_ + static_cast<long>(k);
  }
  return support_max();
}

double
convolve_density(const DiscretePmf& pmf, const NoiseSpec& spec, double z)
{
  const double g2 = spec.gamma2();
  const long lo = std::max(pmf.support_min(), static_cast<long>(std::ceil(z - g2)));
  const long hi = std::min(pmf.support_max(), static_cast<long>(std::floor(z + g2)));
  double sum = 0.0;
  for (long k = lo; k <= hi; ++k) {
    sum += pmf.probabilities()[static_cast<std::size_t>(k - pmf.support_min())] *
           eta_density(spec, z - static_cast<double>(k));
  }
  return sum;
}

// ---------------------------------------------------------------------------
// GaussianConditional

double
GaussianConditional::density(double x, double z) const
{
  return boost::math::pdf(boost::math::normal(mean(z), sd(z)), x);
}

double
GaussianConditional::cdf(double x, double z) const
{
  return boost::math::cdf(boost::math::normal(mean(z), sd(z)), x);
}

double
GaussianConditional::quantile(double alpha, double z) const
{
  if (alpha <= 0.0)
    return -std::numeric_limits<double>::infinity();
  if (alpha >= 1.0)
    return std::numeric_limits<double>::infinity();
  return boost::math::quantile(boost::math::normal(mean(z), sd(z)), alpha);
}

// ---------------------------------------------------------------------------
// SyntheticMixedModel

SyntheticMixedModel::SyntheticMixedModel(
  DiscretePmf margin,
  std::optional<GaussianConditional> conditional)
  : margin_(std::move(margin))
  , conditional_(conditional)
{
  if (conditional_) {
    for (long z = margin_.support_min(); z <= margin_.support_max(); ++z) {
      if (!(conditional_->sd(static_cast<double>(z)) > 0.0))
        throw InvalidParameter(
          "conditional standard deviation must be positive on the support");
    }
  }
}

std::vector<std::string>
SyntheticMixedModel::column_names() const
{
  if (conditional_)
    return { "z", "x" };
  return { "z" };
}

Eigen::MatrixXd
SyntheticMixedModel::sample(std::size_t n, std::uint64_t seed) const
{
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n),
                      static_cast<Eigen::Index>(dim()));
  RandomStream rng(seed);
  const auto& p = margin_.probabilities();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double u = rng.uniform_open();
    double cum = 0.0;
    std::size_t k = 0;
    for (; k + 1 < p.size(); ++k) {
      cum += p[k];
      if (u < cum)
        break;
    }
    const double z = static_cast<double>(margin_.support_min() + static_cast<long>(k));
    out(i, 0) = z;
    if (conditional_)
      out(i, 1) = conditional_->mean(z) + conditional_->sd(z) * rng.normal();
  }
  return out;
}

namespace {

std::pair<double, double>
affine_coefficients(const nlohmann::json& j)
{
  if (j.is_number())
    return { j.get<double>(), 0.0 };
  if (j.is_array() && j.size() == 2)
    return { j[0].get<double>(), j[1].get<double>() };
  throw InvalidParameter("expected a number or a [intercept, slope] pair");
}

} // namespace

SyntheticMixedModel
SyntheticMixedModel::from_json(const std::string& text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("model config: ") + e.what());
  }
  try {
    const auto& d = j.at("discrete");
    const auto family = d.at("family").get<std::string>();
    std::optional<DiscretePmf> margin;
    if (family == "binomial") {
      margin = DiscretePmf::binomial(d.at("size").get<unsigned>(),
                                     d.at("prob").get<double>());
    } else if (family == "bernoulli") {
      margin = DiscretePmf::bernoulli(d.at("prob").get<double>());
    } else if (family == "poisson_truncated") {
      margin = DiscretePmf::poisson_truncated(d.at("lambda").get<double>(),
                                              d.at("max").get<unsigned>());
    } else {
      throw InvalidParameter("unknown discrete family: " + family);
    }

    std::optional<GaussianConditional> cond;
    if (j.contains("continuous")) {
      const auto& c = j.at("continuous");
      const auto cfam = c.value("family", std::string("gaussian"));
      if (cfam != "gaussian")
        throw InvalidParameter("unknown continuous family: " + cfam);
      GaussianConditional g;
      std::tie(g.mean0, g.mean1) = affine_coefficients(c.at("mean"));
      std::tie(g.sd0, g.sd1) = affine_coefficients(c.at("sd"));
      cond = g;
    }
    return SyntheticMixedModel(std::move(*margin), cond);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("model config: ") + e.what());
  }
}

SyntheticMixedModel
SyntheticMixedModel::from_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw IngestionError("cannot open model config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

// ---------------------------------------------------------------------------
// true_conditional

namespace {

double
pmf_functional(const DiscretePmf& pmf, const Functional& functional)
{
  return std::visit(
    [&](const auto& f) -> double {
      using F = std::decay_t<decltype(f)>;
      if constexpr (std::is_same_v<F, functional::Mean>)
        return pmf.mean();
      else if constexpr (std::is_same_v<F, functional::Cdf>)
        return pmf.cdf(f.at);
      else
        return static_cast<double>(pmf.quantile(f.alpha));
    },
    functional);
}

} // namespace

double
true_conditional(const SyntheticMixedModel& model,
                 const Functional& functional,
                 const Condition& condition)
{
  const auto& margin = model.margin();

  if (std::holds_alternative<condition::None>(condition))
    return pmf_functional(margin, functional);

  if (!model.conditional())
    throw InvalidParameter(
      "conditioning on the continuous part of a pure-discrete model");
  const auto& g = *model.conditional();

  if (const auto* dv = std::get_if<condition::DiscreteValue>(&condition)) {
    const auto z = static_cast<double>(dv->value);
    if (margin.pmf(z) == 0.0)
      throw UndefinedConditional("conditioning value has probability zero");
    return std::visit(
      [&](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, functional::Mean>)
          return g.mean(z);
        else if constexpr (std::is_same_v<F, functional::Cdf>)
          return g.cdf(f.at, z);
        else {
          if (!(f.alpha >= 0.0 && f.alpha <= 1.0))
            throw InvalidParameter("quantile level must lie in [0, 1]");
          return g.quantile(f.alpha, z);
        }
      },
      functional);
  }

  // Z | X in [lo, hi] (lo == hi: conditioning on the density value at lo)
  const auto& iv = std::get<condition::ContinuousInterval>(condition);
  if (!(iv.lo <= iv.hi))
    throw InvalidParameter("conditioning interval must satisfy lo <= hi");
  std::vector<double> w(margin.probabilities().size());
  double total = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double z =
      static_cast<double>(margin.support_min() + static_cast<long>(k));
    const double like = iv.lo == iv.hi ? g.density(iv.lo, z)
                                       : g.cdf(iv.hi, z) - g.cdf(iv.lo, z);
    w[k] = margin.probabilities()[k] * like;
    total += w[k];
  }
  if (!(total > 0.0))
    throw UndefinedConditional("conditioning event has probability zero");
  for (auto& v : w)
    v /= total;
  // renormalized weights can miss 1 by rounding; rebuild the pmf exactly
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w)
    v /= s;
  return pmf_functional(DiscretePmf(margin.support_min(), std::move(w)),
                        functional);
}

// ---------------------------------------------------------------------------
// AnalyticJitteredDensity

AnalyticJitteredDensity::AnalyticJitteredDensity(SyntheticMixedModel model,
                                                 NoiseSpec noise)
  : model_(std::move(model))
  , noise_(noise.with_dims(1))
{}

double
AnalyticJitteredDensity::density(std::span<const double> point,
                                 std::span<const std::size_t> active) const
{
  bool use_z = false;
  bool use_x = false;
  for (auto c : active) {
    if (c == 0)
      use_z = true;
    else if (c == 1 && model_.conditional())
      use_x = true;
    else
      throw SchemaError("analytic density: column index out of range");
  }
  const auto& margin = model_.margin();
  if (!use_x) {
    return use_z ? convolve_density(margin, noise_, point[0]) : 1.0;
  }
  const auto& g = *model_.conditional();
  double sum = 0.0;
  for (long k = margin.support_min(); k <= margin.support_max(); ++k) {
    const auto kd = static_cast<double>(k);
    double term = margin.pmf(kd) * g.density(point[1], kd);
    if (use_z)
      term *= eta_density(noise_, point[0] - kd);
    sum += term;
  }
  return sum;
}

Interval
AnalyticJitteredDensity::observed_range(std::size_t col) const
{
  const auto& margin = model_.margin();
  if (col == 0)
    return { static_cast<double>(margin.support_min()),
             static_cast<double>(margin.support_max()) };
  const auto& g = *model_.conditional();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (long k = margin.support_min(); k <= margin.support_max(); ++k) {
    const auto kd = static_cast<double>(k);
    lo = std::min(lo, g.mean(kd) - 8.0 * g.sd(kd));
    hi = std::max(hi, g.mean(kd) + 8.0 * g.sd(kd));
  }
  return { lo, hi };
}

Interval
AnalyticJitteredDensity::mass_window(std::size_t col) const
{
  if (col == 0) {
    const auto r = observed_range(0);
    return { r.lo - 1.0, r.hi + 1.0 };
  }
  const auto& margin = model_.margin();
  const auto& g = *model_.conditional();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (long k = margin.support_min(); k <= margin.support_max(); ++k) {
    const auto kd = static_cast<double>(k);
    lo = std::min(lo, g.mean(kd) - 12.0 * g.sd(kd));
    hi = std::max(hi, g.mean(kd) + 12.0 * g.sd(kd));
  }
  return { lo, hi };
}

std::vector<double>
AnalyticJitteredDensity::break_hints(std::size_t col, double lo, double hi) const
{
  if (col != 0)
    return {};
  return integer_kink_hints(lo, hi, noise_.gamma1(), noise_.gamma2());
}

} // namespace jitter
