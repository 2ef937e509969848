#pragma once

#include "jitter/density_source.hpp"
#include "jitter/noise.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace jitter {

//! Probability mass function with finite support {min, min + 1, ...}.
class DiscretePmf
{
public:
  DiscretePmf(long support_min, std::vector<double> probabilities);

  static DiscretePmf binomial(unsigned size, double prob);
  static DiscretePmf bernoulli(double prob);
  //! Poisson(lambda) conditioned on {0, ..., max_value}.
  static DiscretePmf poisson_truncated(double lambda, unsigned max_value);

  long support_min() const { return support_min_; }
  long support_max() const
  {
    return support_min_ + static_cast<long>(probs_.size()) - 1;
  }
  const std::vector<double>& probabilities() const { return probs_; }

  //! mass at z (zero off the support, including non-integers).
  double pmf(double z) const;
  double cdf(double z) const;
  double mean() const;
  //! smallest support point with cdf >= alpha.
  long quantile(double alpha) const;

private:
  long support_min_;
  std::vector<double> probs_;
};

//! f_{Z + eps}(z) = sum_k pmf(k) eta(z - k).
double
convolve_density(const DiscretePmf& pmf, const NoiseSpec& spec, double z);

//! X | Z = z ~ N(mean0 + mean1 * z, (sd0 + sd1 * z)^2).
struct GaussianConditional
{
  double mean0 = 0.0;
  double mean1 = 0.0;
  double sd0 = 1.0;
  double sd1 = 0.0;

  double mean(double z) const { return mean0 + mean1 * z; }
  double sd(double z) const { return sd0 + sd1 * z; }

  double density(double x, double z) const;
  double cdf(double x, double z) const;
  double quantile(double alpha, double z) const;
};

//! f_{Z,X}(z, x) = f_Z(z) f_{X|Z}(x | z), with an optional continuous part.
class SyntheticMixedModel
{
public:
  explicit SyntheticMixedModel(
    DiscretePmf margin,
    std::optional<GaussianConditional> conditional = std::nullopt);

  const DiscretePmf& margin() const { return margin_; }
  const std::optional<GaussianConditional>& conditional() const
  {
    return conditional_;
  }
  bool pure_discrete() const { return !conditional_.has_value(); }

  //! 1 (z) or 2 (z, x) columns.
  std::size_t dim() const { return conditional_ ? 2 : 1; }
  std::vector<std::string> column_names() const;

  //! n x dim() matrix of draws.
  Eigen::MatrixXd sample(std::size_t n, std::uint64_t seed) const;

  //! Parses a JSON model description:
  //!   {"discrete": {"family": "binomial", "size": 4, "prob": 0.3},
  //!    "continuous": {"family": "gaussian", "mean": [0, 1], "sd": [1, 0]}}
  //! Families: binomial(size, prob), bernoulli(prob),
  //! poisson_truncated(lambda, max). The continuous block is optional.
  static SyntheticMixedModel from_json(const std::string& text);
  static SyntheticMixedModel from_file(const std::string& path);

private:
  DiscretePmf margin_;
  std::optional<GaussianConditional> conditional_;
};

namespace functional {
struct Mean
{};
struct Cdf
{
  double at;
};
struct Quantile
{
  double alpha;
};
} // namespace functional

using Functional =
  std::variant<functional::Mean, functional::Cdf, functional::Quantile>;

namespace condition {
//! target is the discrete variable, unconditionally.
struct None
{};
//! target is X given Z = value.
struct DiscreteValue
{
  long value;
};
//! target is Z given X in [lo, hi].
struct ContinuousInterval
{
  double lo;
  double hi;
};
} // namespace condition

using Condition = std::variant<condition::None,
                               condition::DiscreteValue,
                               condition::ContinuousInterval>;

//! Exact value of a mean / cdf / quantile functional of the model.
double
true_conditional(const SyntheticMixedModel& model,
                 const Functional& functional,
                 const Condition& condition);

//! The exact density of the jittered model (Z + eps, X) as a DensitySource.
class AnalyticJitteredDensity : public DensitySource
{
public:
  AnalyticJitteredDensity(SyntheticMixedModel model, NoiseSpec noise);

  std::size_t dim() const override { return model_.dim(); }
  double density(std::span<const double> point,
                 std::span<const std::size_t> active) const override;
  using DensitySource::density;
  bool is_discrete(std::size_t col) const override { return col == 0; }
  Interval observed_range(std::size_t col) const override;
  Interval mass_window(std::size_t col) const override;
  std::vector<double> break_hints(std::size_t col,
                                  double lo,
                                  double hi) const override;

  const SyntheticMixedModel& model() const { return model_; }
  const NoiseSpec& noise() const { return noise_; }

private:
  SyntheticMixedModel model_;
  NoiseSpec noise_;
};

} // namespace jitter
