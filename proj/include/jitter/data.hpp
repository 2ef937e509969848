#pragma once

#include "jitter/noise.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace jitter {

enum class ColumnKind
{
  discrete_ordered,
  continuous,
  categorical
};

std::string
to_string(ColumnKind kind);
ColumnKind
column_kind_from_string(const std::string& name);

struct ColumnSchema
{
  std::string name;
  ColumnKind kind;
  //! level labels of a categorical column, lexicographically sorted; the
  //! stored value is the index into this list.
  std::vector<std::string> levels = {};

  bool operator==(const ColumnSchema&) const = default;
};

//! Typed columns plus an n x (p + q) value matrix.
//!
//! Discrete columns hold integer-valued doubles. Categorical columns hold
//! level codes until they are dummy coded.
class MixedDataset
{
public:
  MixedDataset() = default;
  MixedDataset(std::vector<ColumnSchema> schema, Eigen::MatrixXd values);

  const std::vector<ColumnSchema>& schema() const { return schema_; }
  const Eigen::MatrixXd& values() const { return values_; }

  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return schema_.size(); }

  std::size_t column_index(const std::string& name) const;
  std::vector<std::size_t> columns_of_kind(ColumnKind kind) const;
  std::size_t num_discrete() const
  {
    return columns_of_kind(ColumnKind::discrete_ordered).size();
  }
  std::vector<std::string> names() const;

private:
  std::vector<ColumnSchema> schema_;
  Eigen::MatrixXd values_;
};

//! Declared column kinds; columns are matched to the CSV header by name.
struct SchemaSpec
{
  std::vector<std::string> discrete;
  std::vector<std::string> continuous;
  std::vector<std::string> categorical;
};

MixedDataset
load_csv(const std::string& path, const SchemaSpec& schema);
MixedDataset
parse_csv(std::istream& in, const SchemaSpec& schema);

//! Writes the values with a header row; categorical columns are written as
//! their labels, doubles in shortest round-trip form.
void
write_csv(std::ostream& out, const MixedDataset& data);
void
write_csv(const std::string& path, const MixedDataset& data);

//! Replaces a categorical column by one binary discrete column per level,
//! named `<column>=<level>`, in lexicographic level order.
MixedDataset
dummy_code(const MixedDataset& data, const std::string& column_name);

//! dummy_code applied to every categorical column.
MixedDataset
dummy_code_all(const MixedDataset& data);

//! A dataset with noise added to its discrete columns.
struct JitteredDataset
{
  std::shared_ptr<const MixedDataset> origin;
  NoiseSpec noise;
  std::uint64_t seed;
  std::uint64_t replicate_index;
  Eigen::MatrixXd values;

  //! the jittered values under the origin's schema.
  MixedDataset as_dataset() const;
};

//! Adds noise from stream (seed, replicate_index) to the discrete columns.
//! Requires spec.dims() == number of discrete columns and no categorical
//! columns.
JitteredDataset
jitter(std::shared_ptr<const MixedDataset> data,
       const NoiseSpec& spec,
       std::uint64_t seed,
       std::uint64_t replicate_index = 0);

JitteredDataset
jitter(const MixedDataset& data,
       const NoiseSpec& spec,
       std::uint64_t seed,
       std::uint64_t replicate_index = 0);

//! Per-column affine map x -> (x - center) / scale.
struct StandardizeTransform
{
  Eigen::VectorXd center;
  Eigen::VectorXd scale;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& values) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& values) const;
  Eigen::VectorXd apply_point(const Eigen::VectorXd& point) const;

  //! fit to the sample mean and (n - 1) standard deviation of each column.
  static StandardizeTransform fit(const Eigen::MatrixXd& values,
                                  const std::vector<std::string>& names = {});
};

struct Standardized
{
  MixedDataset data;
  StandardizeTransform transform;
};

//! Centers each column and scales to unit sample variance.
Standardized
standardize(const MixedDataset& data);

} // namespace jitter
