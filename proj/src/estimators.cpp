#include "jitter/estimators.hpp"

#include "jitter/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace jitter {

std::string
to_string(Kernel kernel)
{
  return kernel == Kernel::gaussian ? "gaussian" : "epanechnikov";
}

Kernel
kernel_from_string(const std::string& name)
{
  if (name == "gaussian")
    return Kernel::gaussian;
  if (name == "epanechnikov")
    return Kernel::epanechnikov;
  throw InvalidParameter("unknown kernel: " + name);
}

Eigen::VectorXd
select_bandwidth(std::size_t n, std::size_t d)
{
  if (n < 2)
    throw InsufficientData("bandwidth selection needs at least two rows");
  if (d == 0)
    throw InvalidParameter("bandwidth selection needs at least one column");
  const auto dd = static_cast<double>(d);
  const double b = std::pow(4.0 / (dd + 2.0), 1.0 / (dd + 4.0)) *
                   std::pow(static_cast<double>(n), -1.0 / (dd + 4.0));
  return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), b);
}

Eigen::VectorXd
select_bandwidth(const MixedDataset& data)
{
  return select_bandwidth(data.rows(), data.cols());
}

namespace {

void
check_bandwidths(const Eigen::VectorXd& bw, std::size_t d)
{
  if (static_cast<std::size_t>(bw.size()) != d)
    throw InvalidParameter("expected " + std::to_string(d) + " bandwidths, got " +
                           std::to_string(bw.size()));
  for (Eigen::Index j = 0; j < bw.size(); ++j) {
    if (!(bw(j) > 0.0) || !std::isfinite(bw(j)))
      throw InvalidParameter("bandwidths must be positive and finite");
  }
}

std::vector<JitteredDataset>
draw_replicates(const std::shared_ptr<const MixedDataset>& data,
                const NoiseSpec& noise,
                std::size_t num_jitters,
                std::uint64_t seed)
{
  if (num_jitters == 0)
    throw InvalidParameter("num_jitters must be at least 1");
  std::vector<JitteredDataset> out;
  out.reserve(num_jitters);
  for (std::size_t r = 0; r < num_jitters; ++r)
    out.push_back(jitter(data, noise, seed, r));
  return out;
}

} // namespace

// ---------------------------------------------------------------------------
// KdeModel

KdeModel
KdeModel::fit(std::shared_ptr<const MixedDataset> data,
              const NoiseSpec& noise,
              const FitOptions& options)
{
  if (!data)
    throw SchemaError("fit_kde: null dataset");
  if (data->rows() < 2)
    throw InsufficientData("fit_kde needs at least two rows");
  if (data->cols() == 0)
    throw SchemaError("fit_kde: dataset has no columns");

  auto replicates = draw_replicates(data, noise, options.num_jitters, options.seed);
  auto transform = StandardizeTransform::fit(replicates.front().values, data->names());
  Eigen::VectorXd bw = options.bandwidth
                         ? *options.bandwidth
                         : select_bandwidth(data->rows(), data->cols());
  return from_parts(std::move(data),
                    noise,
                    options.kernel,
                    options.seed,
                    std::move(replicates),
                    std::move(transform),
                    std::move(bw));
}

KdeModel
KdeModel::from_parts(std::shared_ptr<const MixedDataset> data,
                     const NoiseSpec& noise,
                     Kernel kernel,
                     std::uint64_t seed,
                     std::vector<JitteredDataset> replicates,
                     StandardizeTransform transform,
                     Eigen::VectorXd bandwidths)
{
  if (!data || replicates.empty())
    throw SchemaError("KdeModel: missing data or replicates");
  check_bandwidths(bandwidths, data->cols());
  KdeModel m;
  m.origin_ = std::move(data);
  m.noise_ = noise;
  m.kernel_ = kernel;
  m.seed_ = seed;
  m.replicates_ = std::move(replicates);
  m.transform_ = std::move(transform);
  m.bandwidths_ = std::move(bandwidths);
  m.prepare();
  return m;
}

void
KdeModel::prepare()
{
  const auto n = static_cast<Eigen::Index>(origin_->rows());
  const auto d = static_cast<Eigen::Index>(origin_->cols());
  if (transform_.center.size() != d || transform_.scale.size() != d)
    throw SchemaError("KdeModel: transform does not match the data width");
  standardized_.clear();
  for (const auto& rep : replicates_) {
    if (rep.values.rows() != n || rep.values.cols() != d)
      throw SchemaError("KdeModel: replicate shape does not match the data");
    standardized_.push_back(transform_.apply(rep.values));
  }
  inv_bandwidths_ = bandwidths_.cwiseInverse();

  kinks_.assign(origin_->cols(), {});
  if (kernel_ != Kernel::epanechnikov)
    return;
  for (std::size_t c = 0; c < origin_->cols(); ++c) {
    const auto cc = static_cast<Eigen::Index>(c);
    const double h = bandwidths_(cc) * transform_.scale(cc);
    auto& k = kinks_[c];
    for (const auto& rep : replicates_) {
      for (Eigen::Index i = 0; i < rep.values.rows(); ++i) {
        k.push_back(rep.values(i, cc) - h);
        k.push_back(rep.values(i, cc) + h);
      }
    }
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
  }
}

double
KdeModel::replicate_sum(std::size_t r,
                        const Eigen::VectorXd& z,
                        std::span<const std::size_t> active) const
{
  const auto& x = standardized_[r];
  std::vector<double> point(active.size());
  std::vector<double> inv_bw(active.size());
  for (std::size_t k = 0; k < active.size(); ++k) {
    point[k] = z(static_cast<Eigen::Index>(active[k]));
    inv_bw[k] = inv_bandwidths_(static_cast<Eigen::Index>(active[k]));
  }
  const simd::KernelBlock block{ x.data(),
                                 static_cast<std::size_t>(x.rows()),
                                 static_cast<std::size_t>(x.rows()),
                                 active.data(),
                                 active.size(),
                                 point.data(),
                                 inv_bw.data() };
  return simd::kernel_sum(kernel_, block);
}

double
KdeModel::density(std::span<const double> point,
                  std::span<const std::size_t> active) const
{
  if (point.size() != dim())
    throw InvalidParameter("kde: point has " + std::to_string(point.size()) +
                           " coordinates, model has " + std::to_string(dim()));
  for (auto c : active) {
    if (c >= dim())
      throw InvalidParameter("kde: active column out of range");
  }
  const Eigen::VectorXd z = transform_.apply_point(
    Eigen::Map<const Eigen::VectorXd>(point.data(), static_cast<Eigen::Index>(point.size())));

  double norm = static_cast<double>(origin_->rows());
  for (auto c : active) {
    const auto cc = static_cast<Eigen::Index>(c);
    norm *= bandwidths_(cc) * transform_.scale(cc);
  }
  double total = 0.0;
  for (std::size_t r = 0; r < replicates_.size(); ++r)
    total += replicate_sum(r, z, active) / norm;
  return total / static_cast<double>(replicates_.size());
}

double
KdeModel::eval(std::span<const double> point) const
{
  return DensitySource::density(point);
}

double
KdeModel::eval_replicate(std::size_t r, std::span<const double> point) const
{
  if (r >= replicates_.size())
    throw InvalidParameter("kde: replicate index out of range");
  if (point.size() != dim())
    throw InvalidParameter("kde: point dimension mismatch");
  const Eigen::VectorXd z = transform_.apply_point(
    Eigen::Map<const Eigen::VectorXd>(point.data(), static_cast<Eigen::Index>(point.size())));
  std::vector<std::size_t> all(dim());
  double norm = static_cast<double>(origin_->rows());
  for (std::size_t c = 0; c < dim(); ++c) {
    all[c] = c;
    const auto cc = static_cast<Eigen::Index>(c);
    norm *= bandwidths_(cc) * transform_.scale(cc);
  }
  return replicate_sum(r, z, all) / norm;
}

bool
KdeModel::is_discrete(std::size_t col) const
{
  return origin_->schema().at(col).kind == ColumnKind::discrete_ordered;
}

Interval
KdeModel::observed_range(std::size_t col) const
{
  const auto c = origin_->values().col(static_cast<Eigen::Index>(col));
  return { c.minCoeff(), c.maxCoeff() };
}

Interval
KdeModel::mass_window(std::size_t col) const
{
  const auto r = observed_range(col);
  // widest bandwidth, in the original units of this column
  const double reach =
    6.0 * bandwidths_.maxCoeff() * transform_.scale(static_cast<Eigen::Index>(col));
  return { r.lo - reach - 1.0, r.hi + reach + 1.0 };
}

std::vector<double>
KdeModel::break_hints(std::size_t col, double lo, double hi) const
{
  std::vector<double> out;
  if (is_discrete(col))
    out = integer_kink_hints(lo, hi, noise_.gamma1(), noise_.gamma2());
  const auto& k = kinks_.at(col);
  if (k.empty())
    return out;
  const auto first = std::lower_bound(k.begin(), k.end(), lo);
  const auto last = std::upper_bound(first, k.end(), hi);
  std::vector<double> merged;
  merged.reserve(out.size() + static_cast<std::size_t>(last - first));
  std::merge(out.begin(), out.end(), first, last, std::back_inserter(merged));
  return merged;
}

// ---------------------------------------------------------------------------
// LocLinModel

LocLinModel
LocLinModel::fit(std::shared_ptr<const MixedDataset> data,
                 std::size_t response_index,
                 const NoiseSpec& noise,
                 const LocLinOptions& options)
{
  if (!data)
    throw SchemaError("fit_loclin: null dataset");
  if (response_index >= data->cols())
    throw SchemaError("fit_loclin: response index out of range");
  const std::size_t d = data->cols() - 1;
  if (d == 0)
    throw SchemaError("fit_loclin: needs at least one covariate");
  if (data->rows() < d + 2)
    throw InsufficientData("fit_loclin: needs at least " +
                           std::to_string(d + 2) + " rows");

  auto replicates = draw_replicates(data, noise, options.num_jitters, options.seed);

  std::vector<std::size_t> cov;
  for (std::size_t j = 0; j < data->cols(); ++j) {
    if (j != response_index)
      cov.push_back(j);
  }
  std::vector<std::string> names;
  for (auto j : cov)
    names.push_back(data->schema()[j].name);
  const Eigen::MatrixXd first =
    replicates.front().values(Eigen::all,
                              std::vector<Eigen::Index>(cov.begin(), cov.end()));
  auto transform = StandardizeTransform::fit(first, names);
  Eigen::VectorXd bw =
    options.bandwidth ? *options.bandwidth : select_bandwidth(data->rows(), d);

  return from_parts(std::move(data),
                    response_index,
                    noise,
                    options.kernel,
                    options.seed,
                    options.jitter_response,
                    std::move(replicates),
                    std::move(transform),
                    std::move(bw));
}

LocLinModel
LocLinModel::from_parts(std::shared_ptr<const MixedDataset> data,
                        std::size_t response_index,
                        const NoiseSpec& noise,
                        Kernel kernel,
                        std::uint64_t seed,
                        bool jitter_response,
                        std::vector<JitteredDataset> replicates,
                        StandardizeTransform transform,
                        Eigen::VectorXd bandwidths)
{
  if (!data || replicates.empty())
    throw SchemaError("LocLinModel: missing data or replicates");
  if (response_index >= data->cols() || data->cols() < 2)
    throw SchemaError("LocLinModel: bad response index");
  check_bandwidths(bandwidths, data->cols() - 1);
  LocLinModel m;
  m.origin_ = std::move(data);
  m.response_ = response_index;
  m.noise_ = noise;
  m.kernel_ = kernel;
  m.seed_ = seed;
  m.jitter_response_ = jitter_response;
  m.replicates_ = std::move(replicates);
  m.transform_ = std::move(transform);
  m.bandwidths_ = std::move(bandwidths);
  m.prepare();
  return m;
}

void
LocLinModel::prepare()
{
  covariates_.clear();
  for (std::size_t j = 0; j < origin_->cols(); ++j) {
    if (j != response_)
      covariates_.push_back(j);
  }
  const std::vector<Eigen::Index> cov(covariates_.begin(), covariates_.end());
  const auto resp = static_cast<Eigen::Index>(response_);
  const bool use_jittered_response =
    jitter_response_ &&
    origin_->schema()[response_].kind == ColumnKind::discrete_ordered;

  standardized_.clear();
  responses_.clear();
  for (const auto& rep : replicates_) {
    if (rep.values.rows() != origin_->values().rows() ||
        rep.values.cols() != origin_->values().cols())
      throw SchemaError("LocLinModel: replicate shape does not match the data");
    standardized_.push_back(
      transform_.apply(rep.values(Eigen::all, cov)));
    responses_.push_back(use_jittered_response ? rep.values.col(resp)
                                               : origin_->values().col(resp));
  }
  inv_bandwidths_ = bandwidths_.cwiseInverse();
}

double
LocLinModel::eval_replicate(std::size_t r, std::span<const double> point) const
{
  if (r >= replicates_.size())
    throw InvalidParameter("loclin: replicate index out of range");
  const std::size_t d = covariates_.size();
  if (point.size() != d)
    throw InvalidParameter("loclin: point has " + std::to_string(point.size()) +
                           " coordinates, expected " + std::to_string(d));
  const Eigen::VectorXd z = transform_.apply_point(
    Eigen::Map<const Eigen::VectorXd>(point.data(), static_cast<Eigen::Index>(d)));

  const auto& x = standardized_[r];
  const auto& y = responses_[r];
  const auto n = x.rows();
  std::vector<std::size_t> cols(d);
  for (std::size_t k = 0; k < d; ++k)
    cols[k] = k;
  const simd::KernelBlock block{ x.data(),
                                 static_cast<std::size_t>(n),
                                 static_cast<std::size_t>(n),
                                 cols.data(),
                                 d,
                                 z.data(),
                                 inv_bandwidths_.data() };
  Eigen::VectorXd w(n);
  simd::kernel_weights(kernel_, block, w.data());

  const double total = w.sum();
  if (!(total >= 1e-12))
    throw NoLocalData("loclin: no observations within kernel reach");

  // weighted normal equations in local coordinates u = (x - z) / b
  const auto p = static_cast<Eigen::Index>(d) + 1;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd row(p);
  row(0) = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w(i) == 0.0)
      continue;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(d); ++k)
      row(k + 1) = (x(i, k) - z(k)) * inv_bandwidths_(k);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(row, w(i));
    rhs.noalias() += w(i) * y(i) * row;
  }
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    // ridge on the slope block only, so that the intercept stays unbiased
    const double ridge = 1e-8 * gram.trace() / static_cast<double>(p);
    for (Eigen::Index k = 1; k < p; ++k)
      gram(k, k) += ridge;
    lu.compute(gram);
  }
  const Eigen::VectorXd beta = lu.solve(rhs);
  return beta(0);
}

double
LocLinModel::eval(std::span<const double> point) const
{
  double total = 0.0;
  for (std::size_t r = 0; r < replicates_.size(); ++r)
    total += eval_replicate(r, point);
  return total / static_cast<double>(replicates_.size());
}

} // namespace jitter
