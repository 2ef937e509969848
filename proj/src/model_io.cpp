#include "jitter/model_io.hpp"

#include "jitter/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace jitter {

using nlohmann::json;

namespace {

json
matrix_to_json(const Eigen::MatrixXd& m)
{
  json cols = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    std::vector<double> c(m.col(j).data(), m.col(j).data() + m.rows());
    cols.push_back(std::move(c));
  }
  return { { "rows", m.rows() }, { "columns", std::move(cols) } };
}

Eigen::MatrixXd
matrix_from_json(const json& j)
{
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto& cols = j.at("columns");
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto v = cols[c].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(v.size()) != rows)
      throw IngestionError("model file: ragged matrix column");
    for (Eigen::Index i = 0; i < rows; ++i)
      m(i, static_cast<Eigen::Index>(c)) = v[static_cast<std::size_t>(i)];
  }
  return m;
}

json
vector_to_json(const Eigen::VectorXd& v)
{
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd
vector_from_json(const json& j)
{
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

json
dataset_to_json(const MixedDataset& d)
{
  json schema = json::array();
  for (const auto& c : d.schema()) {
    schema.push_back(
      { { "name", c.name }, { "kind", to_string(c.kind) }, { "levels", c.levels } });
  }
  return { { "schema", std::move(schema) }, { "values", matrix_to_json(d.values()) } };
}

MixedDataset
dataset_from_json(const json& j)
{
  std::vector<ColumnSchema> schema;
  for (const auto& c : j.at("schema")) {
    schema.push_back({ c.at("name").get<std::string>(),
                       column_kind_from_string(c.at("kind").get<std::string>()),
                       c.at("levels").get<std::vector<std::string>>() });
  }
  return MixedDataset(std::move(schema), matrix_from_json(j.at("values")));
}

json
common_to_json(const std::string& type,
               const MixedDataset& origin,
               const NoiseSpec& noise,
               Kernel kernel,
               std::uint64_t seed,
               const std::vector<JitteredDataset>& replicates,
               const StandardizeTransform& transform,
               const Eigen::VectorXd& bandwidths)
{
  json reps = json::array();
  for (const auto& r : replicates) {
    reps.push_back({ { "replicate_index", r.replicate_index },
                     { "values", matrix_to_json(r.values) } });
  }
  return { { "format", "jitter-model" },
           { "version", model_format_version },
           { "type", type },
           { "noise",
             { { "theta", noise.theta() },
               { "nu", noise.nu() },
               { "dims", noise.dims() } } },
           { "kernel", to_string(kernel) },
           { "seed", seed },
           { "bandwidths", vector_to_json(bandwidths) },
           { "transform",
             { { "center", vector_to_json(transform.center) },
               { "scale", vector_to_json(transform.scale) } } },
           { "origin", dataset_to_json(origin) },
           { "replicates", std::move(reps) } };
}

} // namespace

void
save_model(std::ostream& out, const FittedModel& model)
{
  json j = std::visit(
    [](const auto& m) {
      using M = std::decay_t<decltype(m)>;
      if constexpr (std::is_same_v<M, KdeModel>) {
        return common_to_json("kde", m.origin(), m.noise(), m.kernel(), m.seed(),
                              m.replicates(), m.transform(), m.bandwidths());
      } else {
        auto j = common_to_json("loclin", m.origin(), m.noise(), m.kernel(),
                                m.seed(), m.replicates(), m.transform(),
                                m.bandwidths());
        j["response_index"] = m.response_index();
        j["jitter_response"] = m.jitter_response();
        return j;
      }
    },
    model);
  out << j.dump(1) << '\n';
}

void
save_model(const std::string& path, const FittedModel& model)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IngestionError("cannot open model file for writing: " + path);
  save_model(out, model);
}

FittedModel
load_model(std::istream& in)
{
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw IngestionError(std::string("model file: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "jitter-model")
      throw IngestionError("not a jitter model file");
    const int version = j.at("version").get<int>();
    if (version != model_format_version)
      throw IngestionError("unsupported model file version " +
                           std::to_string(version));

    auto origin = std::make_shared<const MixedDataset>(dataset_from_json(j.at("origin")));
    const auto& nj = j.at("noise");
    const NoiseSpec noise(nj.at("theta").get<double>(),
                          nj.at("nu").get<unsigned>(),
                          nj.at("dims").get<std::size_t>());
    const auto kernel = kernel_from_string(j.at("kernel").get<std::string>());
    const auto seed = j.at("seed").get<std::uint64_t>();
    std::vector<JitteredDataset> reps;
    for (const auto& r : j.at("replicates")) {
      reps.push_back({ origin,
                       noise,
                       seed,
                       r.at("replicate_index").get<std::uint64_t>(),
                       matrix_from_json(r.at("values")) });
    }
    StandardizeTransform t{ vector_from_json(j.at("transform").at("center")),
                            vector_from_json(j.at("transform").at("scale")) };
    auto bw = vector_from_json(j.at("bandwidths"));

    const auto type = j.at("type").get<std::string>();
    if (type == "kde") {
      return KdeModel::from_parts(origin, noise, kernel, seed, std::move(reps),
                                  std::move(t), std::move(bw));
    }
    if (type == "loclin") {
      return LocLinModel::from_parts(origin,
                                     j.at("response_index").get<std::size_t>(),
                                     noise, kernel, seed,
                                     j.at("jitter_response").get<bool>(),
                                     std::move(reps), std::move(t), std::move(bw));
    }
    throw IngestionError("unknown model type: " + type);
  } catch (const json::exception& e) {
    throw IngestionError(std::string("model file: ") + e.what());
  }
}

FittedModel
load_model(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IngestionError("cannot open model file: " + path);
  return load_model(in);
}

} // namespace jitter
