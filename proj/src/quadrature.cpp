#include "jitter/quadrature.hpp"

#include "jitter/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace jitter {

namespace {

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss rule
// (QUADPACK qk15).
constexpr double xgk[8] = {
  0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
  0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
  0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
  0.207784955007898467600689403773245, 0.000000000000000000000000000000000
};
constexpr double wgk[8] = {
  0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
  0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
  0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
  0.204432940075298892414161999234649, 0.209482141084727828012999174891714
};
constexpr double wg[4] = { 0.129484966168869693270611432679082,
                           0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975,
                           0.417959183673469387755102040816327 };

struct Segment
{
  double a;
  double b;
  double value;
  double error;

  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment
gauss_kronrod(const std::function<double(double)>& f, double a, double b)
{
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * wgk[7];
  double gauss = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * xgk[j];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += wgk[j] * fsum;
    if (j % 2 == 1)
      gauss += wg[j / 2] * fsum;
  }
  kronrod *= half;
  gauss *= half;
  return { a, b, kronrod, std::abs(kronrod - gauss) };
}

} // namespace

double
adaptive_integral(const std::function<double(double)>& f,
                  double a,
                  double b,
                  const QuadratureOptions& opts,
                  std::span<const double> breaks)
{
  if (!(a <= b))
    throw InvalidParameter("adaptive_integral: requires a <= b");
  if (a == b)
    return 0.0;

  std::vector<double> knots{ a };
  for (double x : breaks) {
    if (x > a && x < b)
      knots.push_back(x);
  }
  knots.push_back(b);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  std::priority_queue<Segment> work;
  std::vector<Segment> done; // segments too narrow to split further
  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    auto s = gauss_kronrod(f, knots[k], knots[k + 1]);
    total += s.value;
    total_error += s.error;
    work.push(s);
  }

  const auto target = [&] {
    return std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
  };

  std::size_t splits = 0;
  while (total_error > target() && !work.empty()) {
    if (splits >= opts.max_subdivisions) {
      throw NumericalFailure("adaptive_integral: no convergence after " +
                               std::to_string(splits) + " subdivisions",
                             total);
    }
    const Segment s = work.top();
    work.pop();
    const double mid = 0.5 * (s.a + s.b);
    if (!(mid > s.a && mid < s.b)) {
      done.push_back(s);
      continue;
    }
    const auto left = gauss_kronrod(f, s.a, mid);
    const auto right = gauss_kronrod(f, mid, s.b);
    total += left.value + right.value - s.value;
    total_error += left.error + right.error - s.error;
    work.push(left);
    work.push(right);
    ++splits;
  }

  // re-sum to shed the drift of the running updates
  double sum = 0.0;
  for (; !work.empty(); work.pop())
    sum += work.top().value;
  for (const auto& s : done)
    sum += s.value;
  if (total_error > target())
    throw NumericalFailure("adaptive_integral: error target not reachable",
                           sum);
  return sum;
}

double
finite_difference(const std::function<double(double)>& f,
                  double x,
                  int order,
                  double h)
{
  if (!(h > 0.0))
    throw InvalidParameter("finite_difference: step must be positive");
  if (order == 1)
    return (f(x + h) - f(x - h)) / (2.0 * h);
  if (order == 2)
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
  throw InvalidParameter("finite_difference: order must be 1 or 2");
}

} // namespace jitter
