#include "jitter/data.hpp"

#include "jitter/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace jitter {

std::string
to_string(ColumnKind kind)
{
  switch (kind) {
    case ColumnKind::discrete_ordered:
      return "discrete";
    case ColumnKind::continuous:
      return "continuous";
    case ColumnKind::categorical:
      return "categorical";
  }
  return "unknown";
}

ColumnKind
column_kind_from_string(const std::string& name)
{
  if (name == "discrete" || name == "discrete_ordered")
    return ColumnKind::discrete_ordered;
  if (name == "continuous")
    return ColumnKind::continuous;
  if (name == "categorical")
    return ColumnKind::categorical;
  throw SchemaError("unknown column kind: " + name);
}

MixedDataset::MixedDataset(std::vector<ColumnSchema> schema,
                           Eigen::MatrixXd values)
  : schema_(std::move(schema))
  , values_(std::move(values))
{
  if (static_cast<std::size_t>(values_.cols()) != schema_.size())
    throw SchemaError("value matrix width does not match the schema");
  std::set<std::string> seen;
  for (const auto& c : schema_) {
    if (!seen.insert(c.name).second)
      throw SchemaError("duplicate column name: " + c.name);
  }
  for (std::size_t j = 0; j < schema_.size(); ++j) {
    if (schema_[j].kind != ColumnKind::discrete_ordered)
      continue;
    const auto col = values_.col(static_cast<Eigen::Index>(j));
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (col(i) != std::floor(col(i)))
        throw SchemaError("discrete column '" + schema_[j].name +
                          "' holds a non-integer value");
    }
  }
}

std::size_t
MixedDataset::column_index(const std::string& name) const
{
  for (std::size_t j = 0; j < schema_.size(); ++j) {
    if (schema_[j].name == name)
      return j;
  }
  throw SchemaError("no column named '" + name + "'");
}

std::vector<std::size_t>
MixedDataset::columns_of_kind(ColumnKind kind) const
{
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < schema_.size(); ++j) {
    if (schema_[j].kind == kind)
      out.push_back(j);
  }
  return out;
}

std::vector<std::string>
MixedDataset::names() const
{
  std::vector<std::string> out;
  for (const auto& c : schema_)
    out.push_back(c.name);
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string>
split_csv_line(const std::string& line)
{
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted)
    throw IngestionError("unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string
trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool
is_missing(const std::string& s)
{
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "NULL";
}

std::string
cell_ref(std::size_t row, const std::string& column)
{
  return "row " + std::to_string(row) + ", column '" + column + "'";
}

std::string
format_double(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string
quote_if_needed(const std::string& s)
{
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"')
      out += '"';
    out += ch;
  }
  return out + "\"";
}

} // namespace

MixedDataset
parse_csv(std::istream& in, const SchemaSpec& spec)
{
  std::map<std::string, ColumnKind> declared;
  const auto declare = [&](const std::vector<std::string>& names,
                           ColumnKind kind) {
    for (const auto& n : names) {
      if (!declared.emplace(n, kind).second)
        throw SchemaError("column '" + n + "' declared twice");
    }
  };
  declare(spec.discrete, ColumnKind::discrete_ordered);
  declare(spec.continuous, ColumnKind::continuous);
  declare(spec.categorical, ColumnKind::categorical);

  std::string line;
  if (!std::getline(in, line))
    throw IngestionError("input has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
    line.erase(0, 3);
  auto header = split_csv_line(line);
  for (auto& h : header)
    h = trim(h);

  std::vector<ColumnSchema> schema;
  for (const auto& h : header) {
    const auto it = declared.find(h);
    if (it == declared.end())
      throw IngestionError("header column '" + h +
                           "' has no declared kind");
    schema.push_back({ h, it->second });
  }
  for (const auto& [name, kind] : declared) {
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw IngestionError("declared column '" + name +
                           "' is missing from the header");
  }

  const std::size_t d = schema.size();
  std::vector<std::vector<double>> numeric(d);
  std::vector<std::vector<std::string>> labels(d);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty())
      continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (fields.size() != d)
      throw IngestionError("row " + std::to_string(row) + ": expected " +
                           std::to_string(d) + " fields, found " +
                           std::to_string(fields.size()));
    for (std::size_t j = 0; j < d; ++j) {
      const auto cell = trim(fields[j]);
      if (is_missing(cell))
        throw IngestionError("missing value at " + cell_ref(row, schema[j].name));
      if (schema[j].kind == ColumnKind::categorical) {
        labels[j].push_back(cell);
        continue;
      }
      double v = 0.0;
      const char* first = cell.data();
      const char* last = first + cell.size();
      if (*first == '+')
        ++first;
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v))
        throw IngestionError("not a finite number at " +
                             cell_ref(row, schema[j].name) + ": '" + cell + "'");
      if (schema[j].kind == ColumnKind::discrete_ordered && v != std::floor(v))
        throw IngestionError("non-integer value " + cell + " in discrete " +
                             cell_ref(row, schema[j].name));
      numeric[j].push_back(v);
    }
  }

  Eigen::MatrixXd values(static_cast<Eigen::Index>(row),
                         static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    if (schema[j].kind == ColumnKind::categorical) {
      std::set<std::string> levels(labels[j].begin(), labels[j].end());
      schema[j].levels.assign(levels.begin(), levels.end());
      for (std::size_t i = 0; i < row; ++i) {
        const auto pos = std::lower_bound(schema[j].levels.begin(),
                                          schema[j].levels.end(),
                                          labels[j][i]);
        values(static_cast<Eigen::Index>(i), jj) =
          static_cast<double>(pos - schema[j].levels.begin());
      }
    } else {
      for (std::size_t i = 0; i < row; ++i)
        values(static_cast<Eigen::Index>(i), jj) = numeric[j][i];
    }
  }
  return MixedDataset(std::move(schema), std::move(values));
}

MixedDataset
load_csv(const std::string& path, const SchemaSpec& schema)
{
  std::ifstream in(path);
  if (!in)
    throw IngestionError("cannot open input file: " + path);
  return parse_csv(in, schema);
}

void
write_csv(std::ostream& out, const MixedDataset& data)
{
  const auto& schema = data.schema();
  for (std::size_t j = 0; j < schema.size(); ++j)
    out << (j ? "," : "") << quote_if_needed(schema[j].name);
  out << '\n';
  const auto& v = data.values();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (j)
        out << ',';
      const double x = v(i, static_cast<Eigen::Index>(j));
      if (schema[j].kind == ColumnKind::categorical)
        out << quote_if_needed(schema[j].levels.at(static_cast<std::size_t>(x)));
      else
        out << format_double(x);
    }
    out << '\n';
  }
}

void
write_csv(const std::string& path, const MixedDataset& data)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IngestionError("cannot open output file: " + path);
  write_csv(out, data);
}

// ---------------------------------------------------------------------------
// dummy coding

MixedDataset
dummy_code(const MixedDataset& data, const std::string& column_name)
{
  const auto idx = data.column_index(column_name);
  const auto& col_schema = data.schema()[idx];
  if (col_schema.kind != ColumnKind::categorical)
    throw SchemaError("column '" + column_name + "' is not categorical");

  // only observed levels get a dummy
  std::set<std::size_t> observed;
  const auto codes = data.values().col(static_cast<Eigen::Index>(idx));
  for (Eigen::Index i = 0; i < codes.size(); ++i)
    observed.insert(static_cast<std::size_t>(codes(i)));
  if (observed.size() < 2)
    throw DegenerateColumn("categorical column '" + column_name +
                           "' has fewer than two observed levels");

  std::vector<ColumnSchema> schema;
  const auto n = static_cast<Eigen::Index>(data.rows());
  const auto width =
    static_cast<Eigen::Index>(data.cols() - 1 + observed.size());
  Eigen::MatrixXd values(n, width);
  Eigen::Index out_col = 0;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    if (j != idx) {
      schema.push_back(data.schema()[j]);
      values.col(out_col++) = data.values().col(jj);
      continue;
    }
    for (std::size_t level : observed) {
      schema.push_back({ column_name + "=" + col_schema.levels.at(level),
                         ColumnKind::discrete_ordered });
      for (Eigen::Index i = 0; i < n; ++i)
        values(i, out_col) = codes(i) == static_cast<double>(level) ? 1.0 : 0.0;
      ++out_col;
    }
  }
  return MixedDataset(std::move(schema), std::move(values));
}

MixedDataset
dummy_code_all(const MixedDataset& data)
{
  MixedDataset out = data;
  for (const auto& c : data.schema()) {
    if (c.kind == ColumnKind::categorical)
      out = dummy_code(out, c.name);
  }
  return out;
}

// ---------------------------------------------------------------------------
// jittering

MixedDataset
JitteredDataset::as_dataset() const
{
  std::vector<ColumnSchema> schema = origin->schema();
  // jittered discrete columns are no longer integer valued
  for (auto& c : schema) {
    if (c.kind == ColumnKind::discrete_ordered)
      c.kind = ColumnKind::continuous;
  }
  return MixedDataset(std::move(schema), values);
}

JitteredDataset
jitter(std::shared_ptr<const MixedDataset> data,
       const NoiseSpec& spec,
       std::uint64_t seed,
       std::uint64_t replicate_index)
{
  if (!data)
    throw SchemaError("jitter: null dataset");
  if (!data->columns_of_kind(ColumnKind::categorical).empty())
    throw SchemaError("jitter: dummy-code categorical columns first");
  const auto discrete = data->columns_of_kind(ColumnKind::discrete_ordered);
  if (spec.dims() != discrete.size())
    throw SchemaError("jitter: noise dimension " + std::to_string(spec.dims()) +
                      " does not match " + std::to_string(discrete.size()) +
                      " discrete columns");

  const auto noise = sample_noise(spec, seed, data->rows(), replicate_index);
  Eigen::MatrixXd values = data->values();
  for (std::size_t k = 0; k < discrete.size(); ++k) {
    values.col(static_cast<Eigen::Index>(discrete[k])) +=
      noise.col(static_cast<Eigen::Index>(k));
  }
  return { std::move(data), spec, seed, replicate_index, std::move(values) };
}

JitteredDataset
jitter(const MixedDataset& data,
       const NoiseSpec& spec,
       std::uint64_t seed,
       std::uint64_t replicate_index)
{
  return jitter(std::make_shared<const MixedDataset>(data),
                spec,
                seed,
                replicate_index);
}

// ---------------------------------------------------------------------------
// standardization

Eigen::MatrixXd
StandardizeTransform::apply(const Eigen::MatrixXd& values) const
{
  return (values.rowwise() - center.transpose()).array().rowwise() /
         scale.transpose().array();
}

Eigen::MatrixXd
StandardizeTransform::invert(const Eigen::MatrixXd& values) const
{
  return (values.array().rowwise() * scale.transpose().array()).matrix()
           .rowwise() +
         center.transpose();
}

Eigen::VectorXd
StandardizeTransform::apply_point(const Eigen::VectorXd& point) const
{
  return (point - center).cwiseQuotient(scale);
}

StandardizeTransform
StandardizeTransform::fit(const Eigen::MatrixXd& values,
                          const std::vector<std::string>& names)
{
  const auto n = values.rows();
  if (n < 2)
    throw InsufficientData("standardization needs at least two rows");
  StandardizeTransform t;
  t.center = values.colwise().mean().transpose();
  t.scale.resize(values.cols());
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    const double ss = (values.col(j).array() - t.center(j)).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) {
      const auto label = static_cast<std::size_t>(j) < names.size()
                           ? "'" + names[static_cast<std::size_t>(j)] + "'"
                           : std::to_string(j);
      throw DegenerateColumn("column " + label + " has zero variance");
    }
    t.scale(j) = sd;
  }
  return t;
}

Standardized
standardize(const MixedDataset& data)
{
  auto t = StandardizeTransform::fit(data.values(), data.names());
  std::vector<ColumnSchema> schema = data.schema();
  for (auto& c : schema) {
    if (c.kind == ColumnKind::discrete_ordered)
      c.kind = ColumnKind::continuous;
  }
  return { MixedDataset(std::move(schema), t.apply(data.values())),
           std::move(t) };
}

} // namespace jitter
