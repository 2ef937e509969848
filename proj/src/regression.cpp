#include "jitter/regression.hpp"

#include "jitter/errors.hpp"
#include "jitter/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jitter {

std::string
kind_name(const QueryKind& kind)
{
  return std::visit(
    [](const auto& k) -> std::string {
      using K = std::decay_t<decltype(k)>;
      if constexpr (std::is_same_v<K, query::Mean>)
        return "mean";
      else if constexpr (std::is_same_v<K, query::Cdf>)
        return "cdf";
      else if constexpr (std::is_same_v<K, query::Quantile>)
        return "quantile";
      else
        return "classify";
    },
    kind);
}

namespace {

// The density along the response axis with the covariates held fixed.
class ResponseSlice
{
public:
  ResponseSlice(const DensitySource& density,
                std::size_t response,
                const std::vector<std::size_t>& excluded,
                const std::vector<double>& covariate_point,
                const RegressionOptions& options)
    : density_(density)
    , response_(response)
    , point_(density.dim(), 0.0)
    , options_(options)
  {
    if (response >= density.dim())
      throw SchemaError("response index out of range");
    std::size_t next = 0;
    for (std::size_t j = 0; j < density.dim(); ++j) {
      if (j == response) {
        active_.push_back(j);
        continue;
      }
      if (std::find(excluded.begin(), excluded.end(), j) != excluded.end())
        continue;
      if (next >= covariate_point.size())
        throw InvalidParameter("covariate point has too few coordinates");
      point_[j] = covariate_point[next++];
      active_.push_back(j);
    }
    if (next != covariate_point.size())
      throw InvalidParameter("covariate point has " +
                             std::to_string(covariate_point.size()) +
                             " coordinates, expected " + std::to_string(next));
    window_ = density.mass_window(response);
    hints_ = density.break_hints(response, window_.lo, window_.hi);
  }

  double operator()(double s) const
  {
    point_[response_] = s;
    return density_.density(point_, active_);
  }

  const Interval& window() const { return window_; }

  double integrate(double a, double b) const
  {
    return integrate_weighted(a, b, false);
  }

  double integrate_weighted(double a, double b, bool times_s) const
  {
    if (!(a < b))
      return 0.0;
    const QuadratureOptions q{ options_.abs_tol, options_.rel_tol, 20000 };
    if (times_s)
      return adaptive_integral([this](double s) { return s * (*this)(s); },
                               a, b, q, hints_);
    return adaptive_integral([this](double s) { return (*this)(s); }, a, b, q,
                             hints_);
  }

  double denominator() const
  {
    const double d = integrate(window_.lo, window_.hi);
    if (!(d > min_denominator))
      throw NoLocalData("conditioning density vanishes at the query point");
    return d;
  }

private:
  const DensitySource& density_;
  std::size_t response_;
  mutable std::vector<double> point_;
  std::vector<std::size_t> active_;
  Interval window_{};
  std::vector<double> hints_;
  RegressionOptions options_;
};

double
clamp01(double v)
{
  return std::clamp(v, 0.0, 1.0);
}

// Corrected cdf of a discrete response on the integer grid. The integral
// over [window.lo, k] is summed over the pieces between consecutive
// integers, so every threshold sees the same partition, and the result is
// the running maximum of the corrected values from the first integer inside
// the window (an estimated density can overshoot by the half-atom term).
class DiscreteCdfWalk
{
public:
  DiscreteCdfWalk(const ResponseSlice& slice, double denom)
    : slice_(slice)
    , denom_(denom)
    , prev_(slice.window().lo)
    , next_(std::floor(slice.window().lo) + 1.0)
  {}

  //! `k` must be an integer and must not decrease between calls.
  double at(double k)
  {
    const double hi = slice_.window().hi;
    if (k < next_)
      return clamp01(slice_(k) / (2.0 * denom_));
    while (next_ <= k) {
      if (prev_ < hi) {
        const double upper = std::min(next_, hi);
        sum_ += slice_.integrate(prev_, upper);
        prev_ = upper;
      }
      envelope_ = std::max(envelope_, clamp01(sum_ / denom_ + slice_(next_) / (2.0 * denom_)));
      next_ += 1.0;
    }
    return envelope_;
  }

private:
  const ResponseSlice& slice_;
  double denom_;
  double prev_;
  double next_;
  double sum_ = 0.0;
  double envelope_ = 0.0;
};

void
check_discrete_threshold(const FunctionalQuery& q, double t)
{
  if (q.response_kind == ResponseKind::discrete && t != std::floor(t))
    throw InvalidParameter("threshold of a discrete response must be an integer");
}

} // namespace

ConditionalEstimate
cond_mean(const DensitySource& density,
          const FunctionalQuery& query,
          const RegressionOptions& options)
{
  if (!std::holds_alternative<query::Mean>(query.kind))
    throw InvalidParameter("cond_mean needs a mean query");
  const ResponseSlice slice(density, query.response_index, {},
                            query.covariate_point, options);
  const double denom = slice.denominator();
  const auto& w = slice.window();
  const double num = slice.integrate_weighted(w.lo, w.hi, true);
  return { num / denom, {}, denom, query };
}

ConditionalEstimate
cond_cdf(const DensitySource& density,
         const FunctionalQuery& query,
         const RegressionOptions& options)
{
  const auto* c = std::get_if<query::Cdf>(&query.kind);
  if (!c)
    throw InvalidParameter("cond_cdf needs a cdf query");
  const double t = c->threshold;
  check_discrete_threshold(query, t);

  const ResponseSlice slice(density, query.response_index, {},
                            query.covariate_point, options);
  const double denom = slice.denominator();
  const auto& w = slice.window();
  if (t < w.lo)
    return { 0.0, {}, denom, query };
  if (t > w.hi)
    return { 1.0, {}, denom, query };
  if (query.response_kind == ResponseKind::discrete) {
    DiscreteCdfWalk walk(slice, denom);
    return { walk.at(t), {}, denom, query };
  }
  return { clamp01(slice.integrate(w.lo, t) / denom), {}, denom, query };
}

ConditionalEstimate
cond_quantile(const DensitySource& density,
              const FunctionalQuery& query,
              const RegressionOptions& options)
{
  const auto* q = std::get_if<query::Quantile>(&query.kind);
  if (!q)
    throw InvalidParameter("cond_quantile needs a quantile query");
  const double alpha = q->alpha;
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidParameter("quantile level must lie in [0, 1]");

  const ResponseSlice slice(density, query.response_index, {},
                            query.covariate_point, options);
  const double denom = slice.denominator();
  const auto& w = slice.window();

  if (query.response_kind == ResponseKind::discrete) {
    const auto range = density.observed_range(query.response_index);
    const double first = std::ceil(range.lo) - 2.0;
    const double last = std::floor(range.hi) + 2.0;
    DiscreteCdfWalk walk(slice, denom);
    double attained = 0.0;
    for (double k = first; k <= last; k += 1.0) {
      const double cdf = walk.at(k);
      attained = std::max(attained, cdf);
      // quadrature error must not push a level reached exactly past k
      if (cdf >= alpha - options.quantile_tol)
        return { k, {}, denom, query };
    }
    throw QuantileSearchError("quantile level not reached in the search window",
                              attained);
  }

  // continuous response: bisection on the cdf, integrating increments only
  if (alpha == 0.0)
    return { w.lo, {}, denom, query };
  const double total = slice.integrate(w.lo, w.hi) / denom;
  if (total < alpha)
    throw QuantileSearchError("quantile level not reached in the search window",
                              clamp01(total));
  double a = w.lo;
  double b = w.hi;
  double cum_a = 0.0; // cdf at a
  while (b - a > options.quantile_tol) {
    const double mid = 0.5 * (a + b);
    const double cum_mid = cum_a + slice.integrate(a, mid) / denom;
    if (cum_mid >= alpha) {
      b = mid;
    } else {
      a = mid;
      cum_a = cum_mid;
    }
  }
  return { b, {}, denom, query };
}

ConditionalEstimate
classify(const DensitySource& density,
         const FunctionalQuery& query,
         const RegressionOptions& options)
{
  const auto* cp = std::get_if<query::ClassProbs>(&query.kind);
  if (!cp)
    throw InvalidParameter("classify needs a class-probability query");
  const auto& classes = cp->class_columns;
  if (classes.size() < 2)
    throw InvalidParameter("classify needs at least two classes");

  ConditionalEstimate out;
  out.query = query;
  double total = 0.0;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const auto col = classes[k];
    std::vector<std::size_t> others;
    for (auto c : classes) {
      if (c != col)
        others.push_back(c);
    }
    const ResponseSlice slice(density, col, others, query.covariate_point,
                              options);
    const double denom = slice.denominator();
    const auto& w = slice.window();
    const double p =
      clamp01(slice.integrate_weighted(w.lo, w.hi, true) / denom);
    if (k == 0)
      out.denominator_mass = denom;
    out.values.push_back(p);
    total += p;
  }
  if (!(total > 0.0))
    throw NoLocalData("all class probabilities vanish at the query point");
  for (auto& p : out.values)
    p /= total;
  out.value = out.values.front();
  return out;
}

ConditionalEstimate
evaluate(const DensitySource& density,
         const FunctionalQuery& query,
         const RegressionOptions& options)
{
  return std::visit(
    [&](const auto& k) {
      using K = std::decay_t<decltype(k)>;
      if constexpr (std::is_same_v<K, query::Mean>)
        return cond_mean(density, query, options);
      else if constexpr (std::is_same_v<K, query::Cdf>)
        return cond_cdf(density, query, options);
      else if constexpr (std::is_same_v<K, query::Quantile>)
        return cond_quantile(density, query, options);
      else
        return classify(density, query, options);
    },
    query.kind);
}

} // namespace jitter
