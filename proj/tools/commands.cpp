#include "commands.hpp"

#include "jitter/data.hpp"
#include "jitter/errors.hpp"
#include "jitter/estimators.hpp"
#include "jitter/model_io.hpp"
#include "jitter/noise.hpp"
#include "jitter/oracle.hpp"
#include "jitter/quadrature.hpp"
#include "jitter/regression.hpp"
#include "jitter/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace jitter::cli {

namespace {

using nlohmann::json;

// JSON config files: top-level keys are option names of the active
// subcommand; an object value keyed by a subcommand name applies only when
// that subcommand runs.
class JsonConfig : public CLI::Config
{
public:
  explicit JsonConfig(const CLI::App& root)
    : root_(root)
  {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override
  {
    return {};
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override
  {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw CLI::ConfigError(std::string("config file: ") + e.what());
    }
    if (!j.is_object())
      throw CLI::ConfigError("config file: top level must be an object");

    std::vector<std::string> parents;
    for (const auto* sub : root_.get_subcommands())
      parents.push_back(sub->get_name());

    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        if (parents.empty() || key != parents.front())
          continue;
        for (const auto& [k, v] : value.items())
          items.push_back(item(parents, k, v));
      } else {
        items.push_back(item(parents, key, value));
      }
    }
    return items;
  }

private:
  static std::string scalar(const std::string& key, const json& v)
  {
    if (v.is_string())
      return v.get<std::string>();
    if (v.is_boolean())
      return v.get<bool>() ? "true" : "false";
    if (v.is_number())
      return v.dump();
    throw CLI::ConfigError("config file: unsupported value for '" + key + "'");
  }

  static CLI::ConfigItem item(const std::vector<std::string>& parents,
                              const std::string& key,
                              const json& v)
  {
    CLI::ConfigItem it;
    it.parents = parents;
    it.name = key;
    if (v.is_array()) {
      for (const auto& e : v)
        it.inputs.push_back(scalar(key, e));
    } else {
      it.inputs.push_back(scalar(key, v));
    }
    return it;
  }

  const CLI::App& root_;
};

std::string
fmt(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string
fmt_fixed(double v, int digits)
{
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

struct Settings
{
  std::string seed = "0";
  double theta = 0.8;
  unsigned nu = 5;
  std::size_t jitters = 1;
  std::string kernel = "gaussian";
  std::vector<double> bandwidth;
  std::vector<std::string> discrete;
  std::vector<std::string> continuous;
  std::vector<std::string> categorical;

  std::string input;
  std::string output;
  std::string model;

  // jitter
  std::uint64_t replicate = 0;

  // fit
  std::string type = "kde";
  std::string response;
  bool jitter_response = false;

  // eval
  std::string functional = "density";
  double threshold = 0.0;
  double alpha = 0.5;
  std::vector<std::string> at;
  std::string classes;

  // verify
  std::size_t grid_points = 101;
  double tol = 1e-12;
  bool corrupt_density = false;

  // simulate / benchmark
  std::string synthetic;
  std::size_t n = 1000;
  std::vector<std::size_t> n_grid{ 500, 2000, 8000 };
  std::size_t seeds = 20;
  std::vector<std::string> functionals{ "atom_mae", "mean" };
  std::size_t threads = 0;
};

std::uint64_t
resolve_seed(const std::string& text, std::ostream& err)
{
  if (text == "entropy") {
    std::random_device rd;
    const std::uint64_t s = (std::uint64_t(rd()) << 32) ^ rd();
    err << "seed: " << s << '\n';
    return s;
  }
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InvalidParameter("--seed expects a non-negative integer or 'entropy', got '" +
                           text + "'");
  return v;
}

// writes to the named file, or to `fallback` when the name is empty or "-"
class Output
{
public:
  Output(const std::string& path, std::ostream& fallback)
  {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_.open(path, std::ios::binary);
    if (!file_)
      throw IngestionError("cannot open output file: " + path);
    stream_ = &file_;
  }

  std::ostream& get() { return *stream_; }

private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

SchemaSpec
schema_of(const Settings& s)
{
  return { s.discrete, s.continuous, s.categorical };
}

std::shared_ptr<const MixedDataset>
load_input(const Settings& s)
{
  if (s.input.empty())
    throw InvalidParameter("--input is required");
  return std::make_shared<const MixedDataset>(
    dummy_code_all(load_csv(s.input, schema_of(s))));
}

std::vector<double>
parse_point(const std::string& text)
{
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    if (first != last && *first == '+')
      ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
      throw InvalidParameter("--at: not a number: '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// jitter

int
run_jitter(const Settings& s, std::ostream& out, std::ostream& err)
{
  const auto data = load_input(s);
  const NoiseSpec spec(s.theta, s.nu, data->num_discrete());
  const auto j = jitter::jitter(data, spec, resolve_seed(s.seed, err), s.replicate);
  Output o(s.output, out);
  write_csv(o.get(), j.as_dataset());
  return exit_ok;
}

// ---------------------------------------------------------------------------
// fit

int
run_fit(const Settings& s, std::ostream& out, std::ostream& err)
{
  if (s.model.empty())
    throw InvalidParameter("--model is required");
  const auto data = load_input(s);
  const NoiseSpec spec(s.theta, s.nu, data->num_discrete());

  LocLinOptions opts;
  opts.kernel = kernel_from_string(s.kernel);
  opts.num_jitters = s.jitters;
  opts.seed = resolve_seed(s.seed, err);
  opts.jitter_response = s.jitter_response;
  if (!s.bandwidth.empty())
    opts.bandwidth = Eigen::Map<const Eigen::VectorXd>(
      s.bandwidth.data(), static_cast<Eigen::Index>(s.bandwidth.size()));

  if (s.type == "kde") {
    save_model(s.model, fit_kde(data, spec, opts));
  } else if (s.type == "loclin") {
    if (s.response.empty())
      throw InvalidParameter("--response is required for --type loclin");
    save_model(s.model, fit_loclin(data, data->column_index(s.response), spec, opts));
  } else {
    throw InvalidParameter("--type must be kde or loclin");
  }
  out << "fitted " << s.type << " model on " << data->rows() << " rows x "
      << data->cols() << " columns -> " << s.model << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------------------
// eval

struct EvalRow
{
  std::string kind;
  std::vector<double> point;
  double value;
  std::optional<double> denominator;
};

void
write_eval(std::ostream& o,
           const std::vector<std::string>& point_names,
           const std::vector<EvalRow>& rows)
{
  o << "kind";
  for (const auto& n : point_names)
    o << ',' << n;
  o << ",value,denominator_mass\n";
  for (const auto& r : rows) {
    o << r.kind;
    for (double v : r.point)
      o << ',' << fmt(v);
    o << ',' << fmt(r.value) << ',' << (r.denominator ? fmt(*r.denominator) : "NA") << '\n';
  }
}

std::vector<std::vector<double>>
eval_points(const Settings& s, std::size_t dim)
{
  std::vector<std::vector<double>> pts;
  for (const auto& a : s.at) {
    auto p = parse_point(a);
    if (p.size() != dim)
      throw InvalidParameter("--at '" + a + "' has " + std::to_string(p.size()) +
                             " coordinates, expected " + std::to_string(dim));
    pts.push_back(std::move(p));
  }
  if (pts.empty()) {
    if (dim != 0)
      throw InvalidParameter("--at is required (" + std::to_string(dim) + " coordinates)");
    pts.emplace_back();
  }
  return pts;
}

int
eval_kde(const Settings& s, const KdeModel& m, std::ostream& out)
{
  const auto& origin = m.origin();
  std::vector<std::string> names;
  std::vector<EvalRow> rows;

  if (s.functional == "density") {
    names = origin.names();
    for (const auto& p : eval_points(s, origin.cols()))
      rows.push_back({ "density", p, m.eval(p), std::nullopt });
  } else if (s.functional == "classify") {
    if (s.classes.empty())
      throw InvalidParameter("--classes is required for classify");
    const std::string prefix = s.classes + "=";
    std::vector<std::size_t> cls;
    for (std::size_t j = 0; j < origin.cols(); ++j) {
      const auto& name = origin.schema()[j].name;
      if (name.compare(0, prefix.size(), prefix) == 0)
        cls.push_back(j);
      else
        names.push_back(name);
    }
    if (cls.size() < 2)
      throw SchemaError("no dummy columns named '" + prefix + "...' in the model");
    for (const auto& p : eval_points(s, names.size())) {
      const FunctionalQuery q{ query::ClassProbs{ cls }, cls.front(), ResponseKind::discrete, p };
      const auto e = classify(m, q);
      for (std::size_t k = 0; k < cls.size(); ++k)
        rows.push_back({ "classify[" + origin.schema()[cls[k]].name + "]", p, e.values[k],
                         e.denominator_mass });
    }
  } else {
    if (s.response.empty())
      throw InvalidParameter("--response is required for " + s.functional);
    const auto resp = origin.column_index(s.response);
    const auto kind = origin.schema()[resp].kind == ColumnKind::discrete_ordered
                        ? ResponseKind::discrete
                        : ResponseKind::continuous;
    QueryKind qk;
    if (s.functional == "mean")
      qk = query::Mean{};
    else if (s.functional == "cdf")
      qk = query::Cdf{ s.threshold };
    else if (s.functional == "quantile")
      qk = query::Quantile{ s.alpha };
    else
      throw InvalidParameter("--functional must be density, mean, cdf, quantile or classify");
    for (std::size_t j = 0; j < origin.cols(); ++j) {
      if (j != resp)
        names.push_back(origin.schema()[j].name);
    }
    for (const auto& p : eval_points(s, names.size())) {
      const auto e = evaluate(m, { qk, resp, kind, p });
      rows.push_back({ kind_name(qk), p, e.value, e.denominator_mass });
    }
  }
  Output o(s.output, out);
  write_eval(o.get(), names, rows);
  return exit_ok;
}

int
eval_loclin(const Settings& s, const LocLinModel& m, std::ostream& out)
{
  if (s.functional != "mean" && s.functional != "density")
    throw InvalidParameter("local linear models only evaluate --functional mean");
  const auto& origin = m.origin();
  if (!s.response.empty() && origin.column_index(s.response) != m.response_index())
    throw InvalidParameter("model was fitted for response '" +
                           origin.schema()[m.response_index()].name + "'");
  std::vector<std::string> names;
  for (auto c : m.covariates())
    names.push_back(origin.schema()[c].name);
  std::vector<EvalRow> rows;
  for (const auto& p : eval_points(s, names.size()))
    rows.push_back({ "mean", p, m.eval(p), std::nullopt });
  Output o(s.output, out);
  write_eval(o.get(), names, rows);
  return exit_ok;
}

int
run_eval(const Settings& s, std::ostream& out, std::ostream&)
{
  if (s.model.empty())
    throw InvalidParameter("--model is required");
  const auto model = load_model(s.model);
  if (const auto* k = std::get_if<KdeModel>(&model))
    return eval_kde(s, *k, out);
  return eval_loclin(s, std::get<LocLinModel>(model), out);
}

// ---------------------------------------------------------------------------
// verify

struct Check
{
  std::string name;
  double theta;
  unsigned nu;
  double value;
  double tol;
  bool pass;
};

void
verify_spec(const NoiseSpec& spec, const Settings& s, std::vector<Check>& out)
{
  const auto eta = [&](double x) {
    const double v = eta_density(spec, x);
    return s.corrupt_density ? 0.9 * v : v;
  };
  const auto r = verify_membership(spec, eta, s.grid_points, s.tol);
  const double th = spec.theta();
  const unsigned nu = spec.nu();
  out.push_back({ "eta(0) = 1", th, nu, r.value_at_zero, 0.0, r.value_at_zero == 1.0 });
  out.push_back({ "plateau max |eta - 1|", th, nu, r.max_abs_plateau_deviation, s.tol, r.plateau_ok });
  out.push_back({ "outside support max |eta|", th, nu, r.max_abs_outside_support, 0.0, r.support_ok });
  out.push_back({ "mass |1 - int eta|", th, nu, std::abs(r.mass - 1.0), 1e-8,
                  std::abs(r.mass - 1.0) <= 1e-8 });

  const auto pmf = DiscretePmf::binomial(4, 0.3);
  const auto conv = [&](double z) {
    double sum = 0.0;
    for (long k = pmf.support_min(); k <= pmf.support_max(); ++k)
      sum += pmf.pmf(double(k)) * eta(z - double(k));
    return sum;
  };
  double eq = 0.0;
  double step = 0.0;
  double deriv = 0.0;
  const double h = spec.gamma1() / 2.0;
  for (long k = 0; k <= 4; ++k) {
    const auto z = double(k);
    eq = std::max(eq, std::abs(conv(z) - pmf.pmf(z)));
    step = std::max(step, std::abs(conv(z + 0.3) - pmf.pmf(z)));
    deriv = std::max(deriv, std::abs(finite_difference(conv, z, 1, h)));
    deriv = std::max(deriv, std::abs(finite_difference(conv, z, 2, h)));
  }
  out.push_back({ "binomial(4,0.3) density = pmf", th, nu, eq, 1e-10, eq <= 1e-10 });
  if (th == 0.0)
    out.push_back({ "binomial(4,0.3) steps at z+0.3", th, nu, step, 1e-10, step <= 1e-10 });
  out.push_back({ "derivatives at integers", th, nu, deriv, 1e-6, deriv <= 1e-6 });
}

int
run_verify(const Settings& s, bool single_spec, std::ostream& out, std::ostream&)
{
  std::vector<NoiseSpec> specs;
  if (single_spec) {
    specs.emplace_back(s.theta, s.nu);
  } else {
    for (double theta : { 0.0, 0.4, 0.8 })
      for (unsigned nu : { 1u, 2u, 5u })
        specs.emplace_back(theta, nu);
  }
  std::vector<Check> checks;
  for (const auto& sp : specs)
    verify_spec(sp, s, checks);

  std::size_t width = 5;
  for (const auto& c : checks)
    width = std::max(width, c.name.size());
  out << std::left << std::setw(int(width)) << "check" << "  theta  nu  "
      << std::setw(12) << "value" << "  " << std::setw(8) << "tol" << "  status\n";
  std::size_t failed = 0;
  for (const auto& c : checks) {
    out << std::left << std::setw(int(width)) << c.name << "  " << std::setw(5)
        << fmt_fixed(c.theta, 3) << "  " << std::setw(2) << c.nu << "  " << std::setw(12)
        << fmt_fixed(c.value, 6) << "  " << std::setw(8) << fmt_fixed(c.tol, 2) << "  "
        << (c.pass ? "PASS" : "FAIL") << '\n';
    failed += c.pass ? 0 : 1;
  }
  out << std::right;
  if (failed == 0) {
    out << "verify: all " << checks.size() << " checks passed\n";
    return exit_ok;
  }
  out << "verify: " << failed << " of " << checks.size() << " checks failed\n";
  return exit_numerical;
}

// ---------------------------------------------------------------------------
// simulate

SyntheticMixedModel
synthetic_model(const Settings& s)
{
  if (s.synthetic.empty())
    return SyntheticMixedModel(DiscretePmf::binomial(4, 0.3));
  return SyntheticMixedModel::from_file(s.synthetic);
}

int
run_simulate(const Settings& s, std::ostream& out, std::ostream& err)
{
  const auto model = synthetic_model(s);
  const auto names = model.column_names();
  std::vector<ColumnSchema> schema{ { names[0], ColumnKind::discrete_ordered } };
  if (model.dim() == 2)
    schema.push_back({ names[1], ColumnKind::continuous });
  const MixedDataset d(std::move(schema), model.sample(s.n, resolve_seed(s.seed, err)));
  Output o(s.output, out);
  write_csv(o.get(), d);
  return exit_ok;
}

// ---------------------------------------------------------------------------
// benchmark

struct BenchRow
{
  std::size_t n;
  std::size_t seed;
  std::string functional;
  double error;
};

std::vector<BenchRow>
bench_cell(const SyntheticMixedModel& model,
           const NoiseSpec& spec,
           Kernel kernel,
           std::size_t jitters,
           std::uint64_t master,
           std::size_t n,
           std::size_t seed,
           const std::vector<std::string>& functionals)
{
  const std::uint64_t cell = derive_seed(derive_seed(master, n), seed);
  const Eigen::MatrixXd sample = model.sample(n, cell);
  const auto data = std::make_shared<const MixedDataset>(
    std::vector<ColumnSchema>{ { "z", ColumnKind::discrete_ordered } }, sample.col(0));
  const auto kde = fit_kde(data, spec.with_dims(1), { kernel, jitters, cell });
  const auto& pmf = model.margin();

  std::vector<BenchRow> rows;
  for (const auto& f : functionals) {
    double e = 0.0;
    if (f == "atom_mae") {
      for (long k = pmf.support_min(); k <= pmf.support_max(); ++k) {
        const double p[] = { double(k) };
        e += std::abs(kde.eval(p) - pmf.pmf(double(k)));
      }
      e /= double(pmf.probabilities().size());
    } else if (f == "mean") {
      const FunctionalQuery q{ query::Mean{}, 0, ResponseKind::discrete, {} };
      e = std::abs(cond_mean(kde, q).value - pmf.mean());
    } else {
      throw InvalidParameter("unknown benchmark functional: " + f);
    }
    rows.push_back({ n, seed, f, e });
  }
  return rows;
}

double
loglog_slope(const std::vector<double>& n, const std::vector<double>& err)
{
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    mx += std::log(n[i]);
    my += std::log(err[i]);
  }
  mx /= double(n.size());
  my /= double(n.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double dx = std::log(n[i]) - mx;
    sxy += dx * (std::log(err[i]) - my);
    sxx += dx * dx;
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

int
run_benchmark(const Settings& s, std::ostream& out, std::ostream& err)
{
  if (s.n_grid.empty() || s.seeds == 0 || s.functionals.empty())
    throw InvalidParameter("benchmark needs a non-empty --n-grid, --seeds and --functionals");
  for (const auto& f : s.functionals) {
    if (f != "atom_mae" && f != "mean")
      throw InvalidParameter("unknown benchmark functional: " + f);
  }
  const auto model = synthetic_model(s);
  const NoiseSpec spec(s.theta, s.nu, 1);
  const auto kernel = kernel_from_string(s.kernel);
  const auto master = resolve_seed(s.seed, err);
  if (s.jitters == 0)
    throw InvalidParameter("num_jitters must be at least 1");

  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (auto n : s.n_grid)
    for (std::size_t k = 0; k < s.seeds; ++k)
      cells.emplace_back(n, k);

  std::vector<std::vector<BenchRow>> results(cells.size());
  std::atomic<std::size_t> next{ 0 };
  std::mutex fail_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        results[i] = bench_cell(model, spec, kernel, s.jitters, master, cells[i].first,
                                cells[i].second, s.functionals);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fail_mutex);
        if (!failure)
          failure = std::current_exception();
      }
    }
  };
  std::size_t nthreads = s.threads ? s.threads : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min(nthreads, cells.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nthreads; ++t)
    pool.emplace_back(worker);
  for (auto& t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);

  std::vector<BenchRow> rows;
  for (auto& r : results)
    rows.insert(rows.end(), r.begin(), r.end());
  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.n, a.seed, a.functional) < std::tie(b.n, b.seed, b.functional);
  });

  {
    Output o(s.output, out);
    o.get() << "n,seed,functional,error\n";
    for (const auto& r : rows)
      o.get() << r.n << ',' << r.seed << ',' << r.functional << ',' << fmt(r.error) << '\n';
  }

  // summary goes to stderr when the CSV itself is on stdout
  std::ostream& sum = (s.output.empty() || s.output == "-") ? err : out;
  std::vector<std::string> funcs = s.functionals;
  std::sort(funcs.begin(), funcs.end());
  for (const auto& f : funcs) {
    std::map<std::size_t, std::pair<double, std::size_t>> by_n;
    for (const auto& r : rows) {
      if (r.functional == f) {
        by_n[r.n].first += r.error;
        by_n[r.n].second += 1;
      }
    }
    std::vector<double> ns;
    std::vector<double> es;
    sum << f << '\n' << std::setw(10) << "n" << "  " << std::setw(14) << "mean error" << '\n';
    for (const auto& [n, acc] : by_n) {
      ns.push_back(double(n));
      es.push_back(acc.first / double(acc.second));
      sum << std::setw(10) << n << "  " << std::setw(14) << fmt_fixed(es.back(), 6) << '\n';
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < es.size(); ++i)
      decreasing = decreasing && es[i] < es[i - 1];
    sum << "  log-log slope: " << fmt_fixed(loglog_slope(ns, es), 4)
        << "  strictly decreasing: " << (decreasing ? "yes" : "no") << '\n';
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------

void
add_noise_flags(CLI::App* sub, Settings& s)
{
  sub->add_option("--theta", s.theta, "noise mixing weight in [0, 1)")->capture_default_str();
  sub->add_option("--nu", s.nu, "Beta(nu, nu) shape of the smooth noise part")
    ->capture_default_str();
}

void
add_seed_flag(CLI::App* sub, Settings& s)
{
  sub->add_option("--seed", s.seed, "master seed (integer, or 'entropy')")->capture_default_str();
}

void
add_schema_flags(CLI::App* sub, Settings& s)
{
  sub->add_option("--discrete", s.discrete, "integer-valued columns")->delimiter(',');
  sub->add_option("--continuous", s.continuous, "real-valued columns")->delimiter(',');
  sub->add_option("--categorical", s.categorical, "unordered columns, dummy coded")
    ->delimiter(',');
}

void
add_estimator_flags(CLI::App* sub, Settings& s)
{
  sub->add_option("--jitters", s.jitters, "number of jitter replicates")->capture_default_str();
  sub->add_option("--kernel", s.kernel, "gaussian or epanechnikov")->capture_default_str();
  sub->add_option("--bandwidth", s.bandwidth, "per-column bandwidths (standardized scale)")
    ->delimiter(',');
}

int
map_error(const std::exception& e, std::ostream& err)
{
  err << "error: " << e.what() << '\n';
  if (dynamic_cast<const InvalidParameter*>(&e))
    return exit_usage;
  if (dynamic_cast<const IngestionError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
      dynamic_cast<const DegenerateColumn*>(&e) || dynamic_cast<const InsufficientData*>(&e))
    return exit_data;
  if (const auto* q = dynamic_cast<const QuantileSearchError*>(&e))
    err << "attained cdf: " << fmt(q->attained()) << '\n';
  if (const auto* n = dynamic_cast<const NumericalFailure*>(&e))
    err << "best estimate: " << fmt(n->best_estimate()) << '\n';
  return exit_numerical;
}

} // namespace

int
run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  Settings s;
  CLI::App app{ "Jittering estimators for mixed discrete and continuous data" };
  app.name(args.empty() ? "jitter-cli" : args.front());
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "JSON file with option values (flags take precedence)");
  app.config_formatter(std::make_shared<JsonConfig>(app));

  auto* jit = app.add_subcommand("jitter", "add noise to the discrete columns of a CSV file");
  jit->add_option("--input", s.input, "input CSV")->required();
  jit->add_option("--output", s.output, "output CSV (default: stdout)");
  jit->add_option("--replicate", s.replicate, "replicate index (noise stream)")
    ->capture_default_str();
  add_schema_flags(jit, s);
  add_noise_flags(jit, s);
  add_seed_flag(jit, s);

  auto* fit = app.add_subcommand("fit", "fit a jittered KDE or local linear model");
  fit->add_option("--input", s.input, "input CSV")->required();
  fit->add_option("--model", s.model, "output model file")->required();
  fit->add_option("--type", s.type, "kde or loclin")->capture_default_str();
  fit->add_option("--response", s.response, "response column (loclin)");
  fit->add_flag("--jitter-response", s.jitter_response, "jitter a discrete response (loclin)");
  add_schema_flags(fit, s);
  add_noise_flags(fit, s);
  add_seed_flag(fit, s);
  add_estimator_flags(fit, s);

  auto* ev = app.add_subcommand("eval", "evaluate densities and conditional functionals");
  ev->add_option("--model", s.model, "model file written by fit")->required();
  ev->add_option("--functional", s.functional, "density, mean, cdf, quantile or classify")
    ->capture_default_str();
  ev->add_option("--response", s.response, "response column");
  ev->add_option("--threshold", s.threshold, "cdf threshold");
  ev->add_option("--alpha", s.alpha, "quantile level")->capture_default_str();
  ev->add_option("--at", s.at, "evaluation point as comma-separated values (repeatable)");
  ev->add_option("--classes", s.classes, "categorical column whose dummies are classified");
  ev->add_option("--output", s.output, "output CSV (default: stdout)");

  auto* ver = app.add_subcommand("verify", "check the noise class and convolution identities");
  auto* theta_opt = ver->add_option("--theta", s.theta, "check this theta only");
  auto* nu_opt = ver->add_option("--nu", s.nu, "check this nu only");
  ver->add_option("--grid-points", s.grid_points, "grid size on [-1, 1]")->capture_default_str();
  ver->add_option("--tol", s.tol, "plateau tolerance")->capture_default_str();
  ver->add_flag("--inject-corrupt-density", s.corrupt_density)->group("");

  auto* sim = app.add_subcommand("simulate", "draw a sample from a synthetic model");
  sim->add_option("--synthetic", s.synthetic, "JSON model file (default: Binomial(4, 0.3))");
  sim->add_option("--n", s.n, "sample size")->capture_default_str();
  sim->add_option("--output", s.output, "output CSV (default: stdout)");
  add_seed_flag(sim, s);

  auto* bench = app.add_subcommand("benchmark", "error of the jittered KDE versus sample size");
  bench->add_option("--synthetic", s.synthetic, "JSON model file (default: Binomial(4, 0.3))");
  bench->add_option("--n-grid", s.n_grid, "sample sizes")->delimiter(',')->capture_default_str();
  bench->add_option("--seeds", s.seeds, "replications per sample size")->capture_default_str();
  bench->add_option("--functionals", s.functionals, "atom_mae and/or mean")
    ->delimiter(',')
    ->capture_default_str();
  bench->add_option("--threads", s.threads, "worker threads (default: all cores)");
  bench->add_option("--output", s.output, "output CSV (default: stdout)");
  add_noise_flags(bench, s);
  add_seed_flag(bench, s);
  add_estimator_flags(bench, s);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty())
      rev.pop_back();
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (jit->parsed())
      return run_jitter(s, out, err);
    if (fit->parsed())
      return run_fit(s, out, err);
    if (ev->parsed())
      return run_eval(s, out, err);
    if (ver->parsed())
      return run_verify(s, theta_opt->count() > 0 || nu_opt->count() > 0, out, err);
    if (sim->parsed())
      return run_simulate(s, out, err);
    if (bench->parsed())
      return run_benchmark(s, out, err);
  } catch (const Error& e) {
    return map_error(e, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_data;
  }
  return exit_usage;
}

} // namespace jitter::cli
