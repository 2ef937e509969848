#pragma once

#include "jitter/density_source.hpp"

#include <string>
#include <variant>
#include <vector>

namespace jitter {

//! Conditional functionals of a response column given the remaining columns,
//! computed from a jittered joint density.
//!
//! For a discrete response the distribution function carries the half-density
//! correction term
//!   F(t) = int_{-inf}^{t} f ds / int f ds + f(t) / (2 int f ds),
//! which maps the jittered density back to the cdf of the integer response.
//! Quantiles search the integers for discrete responses and bisect for
//! continuous ones.

enum class ResponseKind
{
  discrete,
  continuous
};

namespace query {
struct Mean
{};
struct Cdf
{
  double threshold;
};
struct Quantile
{
  double alpha;
};
struct ClassProbs
{
  //! dummy columns of the class levels, one per class.
  std::vector<std::size_t> class_columns;
};
} // namespace query

using QueryKind =
  std::variant<query::Mean, query::Cdf, query::Quantile, query::ClassProbs>;

std::string
kind_name(const QueryKind& kind);

struct FunctionalQuery
{
  QueryKind kind;
  std::size_t response_index = 0;
  ResponseKind response_kind = ResponseKind::continuous;
  //! values of the conditioning columns, in column order with the response
  //! (or, for class probabilities, the whole dummy block) skipped.
  std::vector<double> covariate_point;
};

struct ConditionalEstimate
{
  //! scalar result; for class probabilities the vector `values`.
  double value = 0.0;
  std::vector<double> values;
  //! conditioning density (the functional's denominator).
  double denominator_mass = 0.0;
  FunctionalQuery query;
};

//! Densities below this value count as "no local data".
inline constexpr double min_denominator = 1e-12;

struct RegressionOptions
{
  double abs_tol = 1e-11;
  double rel_tol = 1e-10;
  //! bisection tolerance of continuous quantiles; for discrete responses,
  //! the slack allowed when comparing the corrected cdf with alpha.
  double quantile_tol = 1e-8;
};

ConditionalEstimate
cond_mean(const DensitySource& density,
          const FunctionalQuery& query,
          const RegressionOptions& options = {});

ConditionalEstimate
cond_cdf(const DensitySource& density,
         const FunctionalQuery& query,
         const RegressionOptions& options = {});

ConditionalEstimate
cond_quantile(const DensitySource& density,
              const FunctionalQuery& query,
              const RegressionOptions& options = {});

ConditionalEstimate
classify(const DensitySource& density,
         const FunctionalQuery& query,
         const RegressionOptions& options = {});

//! Dispatches on the query kind.
ConditionalEstimate
evaluate(const DensitySource& density,
         const FunctionalQuery& query,
         const RegressionOptions& options = {});

} // namespace jitter
