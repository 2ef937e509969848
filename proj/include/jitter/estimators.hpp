#pragma once

#include "jitter/data.hpp"
#include "jitter/density_source.hpp"
#include "jitter/noise.hpp"
#include "jitter/simd/kernels.hpp"

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jitter {

//! Univariate kernel; multivariate kernels are products over coordinates.
using Kernel = simd::KernelType;

std::string
to_string(Kernel kernel);
Kernel
kernel_from_string(const std::string& name);

//! Normal-reference bandwidth (4 / (d + 2))^(1 / (d + 4)) n^(-1 / (d + 4)),
//! identical for all d coordinates of standardized data.
Eigen::VectorXd
select_bandwidth(std::size_t n, std::size_t d);
Eigen::VectorXd
select_bandwidth(const MixedDataset& data);

struct FitOptions
{
  Kernel kernel = Kernel::gaussian;
  std::size_t num_jitters = 1;
  std::uint64_t seed = 0;
  //! per-column bandwidths on the standardized scale.
  std::optional<Eigen::VectorXd> bandwidth = std::nullopt;
};

//! Jittered kernel density estimator.
//!
//! Stores `num_jitters` jittered copies of the data (noise streams
//! 0..num_jitters-1 of `seed`). All copies are standardized with the
//! transform fitted to the first one; bandwidths live on that standardized
//! scale. Evaluation averages the per-copy estimates and maps back to the
//! original units.
class KdeModel : public DensitySource
{
public:
  static KdeModel fit(std::shared_ptr<const MixedDataset> data,
                      const NoiseSpec& noise,
                      const FitOptions& options = {});

  //! Rebuilds a model from stored state (used by deserialization).
  static KdeModel from_parts(std::shared_ptr<const MixedDataset> data,
                             const NoiseSpec& noise,
                             Kernel kernel,
                             std::uint64_t seed,
                             std::vector<JitteredDataset> replicates,
                             StandardizeTransform transform,
                             Eigen::VectorXd bandwidths);

  //! density on the original scale, averaged over replicates.
  double eval(std::span<const double> point) const;
  //! density estimate of a single replicate.
  double eval_replicate(std::size_t r, std::span<const double> point) const;

  // DensitySource
  std::size_t dim() const override { return origin_->cols(); }
  double density(std::span<const double> point,
                 std::span<const std::size_t> active) const override;
  using DensitySource::density;
  bool is_discrete(std::size_t col) const override;
  Interval observed_range(std::size_t col) const override;
  Interval mass_window(std::size_t col) const override;
  std::vector<double> break_hints(std::size_t col,
                                  double lo,
                                  double hi) const override;

  const MixedDataset& origin() const { return *origin_; }
  std::shared_ptr<const MixedDataset> origin_ptr() const { return origin_; }
  const NoiseSpec& noise() const { return noise_; }
  Kernel kernel() const { return kernel_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t num_jitters() const { return replicates_.size(); }
  const std::vector<JitteredDataset>& replicates() const { return replicates_; }
  const StandardizeTransform& transform() const { return transform_; }
  const Eigen::VectorXd& bandwidths() const { return bandwidths_; }

private:
  KdeModel() = default;
  void prepare();
  double replicate_sum(std::size_t r,
                       const Eigen::VectorXd& z,
                       std::span<const std::size_t> active) const;

  std::shared_ptr<const MixedDataset> origin_;
  NoiseSpec noise_{ 0.0, 1, 0 };
  Kernel kernel_ = Kernel::gaussian;
  std::uint64_t seed_ = 0;
  std::vector<JitteredDataset> replicates_;
  StandardizeTransform transform_;
  Eigen::VectorXd bandwidths_;
  // derived: standardized replicate values, inverse bandwidths
  std::vector<Eigen::MatrixXd> standardized_;
  Eigen::VectorXd inv_bandwidths_;
  // compact kernels: sorted support edges of every observation, per column
  std::vector<std::vector<double>> kinks_;
};

inline double
kde_eval(const KdeModel& model, std::span<const double> point)
{
  return model.eval(point);
}

inline KdeModel
fit_kde(std::shared_ptr<const MixedDataset> data,
        const NoiseSpec& noise,
        const FitOptions& options = {})
{
  return KdeModel::fit(std::move(data), noise, options);
}

struct LocLinOptions : FitOptions
{
  //! jitter a discrete response as well (it is left untouched otherwise).
  bool jitter_response = false;
};

//! Jittered local linear regression of one column on all others.
class LocLinModel
{
public:
  static LocLinModel fit(std::shared_ptr<const MixedDataset> data,
                         std::size_t response_index,
                         const NoiseSpec& noise,
                         const LocLinOptions& options = {});

  static LocLinModel from_parts(std::shared_ptr<const MixedDataset> data,
                                std::size_t response_index,
                                const NoiseSpec& noise,
                                Kernel kernel,
                                std::uint64_t seed,
                                bool jitter_response,
                                std::vector<JitteredDataset> replicates,
                                StandardizeTransform transform,
                                Eigen::VectorXd bandwidths);

  //! Conditional mean estimate at `point` (one value per covariate, in
  //! column order with the response skipped), averaged over replicates.
  double eval(std::span<const double> point) const;
  double eval_replicate(std::size_t r, std::span<const double> point) const;

  const MixedDataset& origin() const { return *origin_; }
  std::size_t response_index() const { return response_; }
  const std::vector<std::size_t>& covariates() const { return covariates_; }
  const NoiseSpec& noise() const { return noise_; }
  Kernel kernel() const { return kernel_; }
  std::uint64_t seed() const { return seed_; }
  bool jitter_response() const { return jitter_response_; }
  std::size_t num_jitters() const { return replicates_.size(); }
  const std::vector<JitteredDataset>& replicates() const { return replicates_; }
  //! standardization of the covariate block.
  const StandardizeTransform& transform() const { return transform_; }
  const Eigen::VectorXd& bandwidths() const { return bandwidths_; }
  //! response values used by replicate r.
  const Eigen::VectorXd& response(std::size_t r) const { return responses_[r]; }

private:
  LocLinModel() = default;
  void prepare();

  std::shared_ptr<const MixedDataset> origin_;
  std::size_t response_ = 0;
  std::vector<std::size_t> covariates_;
  NoiseSpec noise_{ 0.0, 1, 0 };
  Kernel kernel_ = Kernel::gaussian;
  std::uint64_t seed_ = 0;
  bool jitter_response_ = false;
  std::vector<JitteredDataset> replicates_;
  StandardizeTransform transform_;
  Eigen::VectorXd bandwidths_;
  std::vector<Eigen::MatrixXd> standardized_; // covariate block only
  std::vector<Eigen::VectorXd> responses_;
  Eigen::VectorXd inv_bandwidths_;
};

inline LocLinModel
fit_loclin(std::shared_ptr<const MixedDataset> data,
           std::size_t response_index,
           const NoiseSpec& noise,
           const LocLinOptions& options = {})
{
  return LocLinModel::fit(std::move(data), response_index, noise, options);
}

inline double
loclin_eval(const LocLinModel& model, std::span<const double> point)
{
  return model.eval(point);
}

} // namespace jitter
