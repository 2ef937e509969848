#include "commands.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using jitter::cli::run;

namespace {

struct Result
{
  int code;
  std::string out;
  std::string err;
};

Result
cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "jitter-cli");
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return { code, out.str(), err.str() };
}

class TempDir
{
public:
  TempDir()
  {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("jitter_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
  fs::path path_;
};

std::string
slurp(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void
spit(const std::string& path, const std::string& text)
{
  std::ofstream(path, std::ios::binary) << text;
}

std::vector<std::vector<std::string>>
rows_of(const std::string& csv)
{
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ','))
      cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

} // namespace

TEST_CASE("usage errors exit with 1")
{
  CHECK(cli({}).code == 1);
  CHECK(cli({ "nonsense" }).code == 1);
  CHECK(cli({ "simulate", "--no-such-flag" }).code == 1);
  CHECK(cli({ "simulate", "--n", "abc" }).code == 1);
  CHECK(cli({ "simulate", "--seed", "-3" }).code == 1);
  CHECK(cli({ "fit", "--input", "x.csv" }).code == 1);
  CHECK(cli({ "--help" }).code == 0);
  CHECK(cli({ "benchmark", "--functionals", "median" }).code == 1);
}

TEST_CASE("data errors exit with 2")
{
  TempDir t;
  const auto r = cli({ "jitter", "--input", t.file("missing.csv"), "--discrete", "z" });
  CHECK(r.code == 2);
  CHECK(r.err.find("missing.csv") != std::string::npos);

  spit(t.file("bad.csv"), "z,x\n1,0.5\nfoo,1\n");
  CHECK(cli({ "jitter", "--input", t.file("bad.csv"), "--discrete", "z", "--continuous", "x" }).code == 2);

  spit(t.file("const.csv"), "x\n1.5\n1.5\n1.5\n1.5\n");
  CHECK(cli({ "fit", "--input", t.file("const.csv"), "--continuous", "x", "--model", t.file("m.json") })
          .code == 2);

  spit(t.file("model.json"), "{}");
  CHECK(cli({ "eval", "--model", t.file("model.json") }).code == 2);
}

TEST_CASE("jitter subcommand")
{
  TempDir t;
  REQUIRE(cli({ "simulate", "--synthetic", t.file("none.json") }).code == 2);

  spit(t.file("syn.json"),
       R"({"discrete": {"family": "binomial", "size": 4, "prob": 0.3},
           "continuous": {"mean": [0, 1], "sd": 1}})");
  REQUIRE(cli({ "simulate", "--synthetic", t.file("syn.json"), "--n", "300", "--seed", "8",
                "--output", t.file("d.csv") })
            .code == 0);
  const auto original = rows_of(slurp(t.file("d.csv")));
  REQUIRE(original.size() == 301);
  REQUIRE(original[0] == std::vector<std::string>{ "z", "x" });

  const std::vector<std::string> base{ "jitter", "--input", t.file("d.csv"), "--discrete", "z",
                                       "--continuous", "x", "--theta", "0", "--seed", "5" };
  auto args = base;
  args.insert(args.end(), { "--output", t.file("j1.csv") });
  REQUIRE(cli(args).code == 0);
  const auto jittered = rows_of(slurp(t.file("j1.csv")));
  REQUIRE(jittered.size() == original.size());
  for (std::size_t i = 1; i < jittered.size(); ++i) {
    const double z = std::stod(original[i][0]);
    const double jz = std::stod(jittered[i][0]);
    CHECK(std::abs(jz - z) < 0.5);
    CHECK(std::round(jz) == z);
    CHECK(jittered[i][1] == original[i][1]);
  }

  SUBCASE("same seed gives identical bytes")
  {
    CHECK(cli(base).out == slurp(t.file("j1.csv")));
    auto other = base;
    other.back() = "6";
    CHECK(cli(other).out != slurp(t.file("j1.csv")));
    auto rep = base;
    rep.insert(rep.end(), { "--replicate", "1" });
    CHECK(cli(rep).out != slurp(t.file("j1.csv")));
  }
}

TEST_CASE("verify subcommand")
{
  const auto r = cli({ "verify" });
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("all 57 checks passed") != std::string::npos);

  const auto one = cli({ "verify", "--theta", "0.4", "--nu", "2" });
  CHECK(one.code == 0);
  CHECK(one.out.find("0.4    2") != std::string::npos);
  CHECK(one.out.find("0.8") == std::string::npos);

  const auto bad = cli({ "verify", "--inject-corrupt-density" });
  CHECK(bad.code == 3);
  CHECK(bad.out.find("FAIL") != std::string::npos);
  // the scaled density sits 0.1 below the plateau
  std::istringstream lines(bad.out);
  std::string line;
  bool found = false;
  while (std::getline(lines, line)) {
    if (line.rfind("plateau", 0) == 0) {
      found = true;
      CHECK(line.find("0.1 ") != std::string::npos);
      CHECK(line.find("FAIL") != std::string::npos);
    }
  }
  CHECK(found);

  CHECK(cli({ "verify", "--theta", "1.0" }).code == 1);
}

TEST_CASE("simulate frequencies and edge cases")
{
  const auto r = cli({ "simulate", "--n", "1000", "--seed", "11" });
  REQUIRE(r.code == 0);
  const auto rows = rows_of(r.out);
  REQUIRE(rows.size() == 1001);
  std::map<int, int> counts;
  for (std::size_t i = 1; i < rows.size(); ++i)
    counts[std::stoi(rows[i][0])]++;
  const double pmf[] = { 0.2401, 0.4116, 0.2646, 0.0756, 0.0081 };
  for (int k = 0; k <= 4; ++k) {
    const double p = pmf[k];
    CHECK(std::abs(counts[k] / 1000.0 - p) <= 3.0 * std::sqrt(p * (1 - p) / 1000.0) + 1e-12);
  }
  CHECK(counts.size() <= 5);

  CHECK(cli({ "simulate", "--n", "0" }).out == "z\n");
  CHECK(cli({ "simulate", "--n", "50", "--seed", "4" }).out ==
        cli({ "simulate", "--n", "50", "--seed", "4" }).out);
  CHECK(cli({ "simulate", "--n", "50", "--seed", "4" }).out !=
        cli({ "simulate", "--n", "50", "--seed", "5" }).out);

  const auto e = cli({ "simulate", "--n", "3", "--seed", "entropy" });
  CHECK(e.code == 0);
  CHECK(e.err.find("seed: ") != std::string::npos);
}

TEST_CASE("fit and eval")
{
  TempDir t;
  REQUIRE(cli({ "simulate", "--n", "400", "--seed", "3", "--output", t.file("d.csv") }).code == 0);
  REQUIRE(cli({ "fit", "--input", t.file("d.csv"), "--discrete", "z", "--model", t.file("m.json"),
                "--jitters", "2" })
            .code == 0);

  const auto mean = cli({ "eval", "--model", t.file("m.json"), "--functional", "mean",
                          "--response", "z" });
  REQUIRE(mean.code == 0);
  const auto mrows = rows_of(mean.out);
  REQUIRE(mrows.size() == 2);
  CHECK(mrows[0] == std::vector<std::string>{ "kind", "value", "denominator_mass" });
  CHECK(mrows[1][0] == "mean");
  CHECK(std::abs(std::stod(mrows[1][1]) - 1.2) < 0.15);
  CHECK(std::abs(std::stod(mrows[1][2]) - 1.0) < 1e-6);

  const auto dens = cli({ "eval", "--model", t.file("m.json"), "--at", "0", "--at=-3", "--at", "1" });
  REQUIRE(dens.code == 0);
  const auto drows = rows_of(dens.out);
  REQUIRE(drows.size() == 4);
  CHECK(drows[1][0] == "density");
  CHECK(drows[1][3] == "NA");
  CHECK(std::stod(drows[3][2]) > std::stod(drows[2][2]));

  const auto q = cli({ "eval", "--model", t.file("m.json"), "--functional", "quantile",
                       "--response", "z", "--alpha", "0.5" });
  REQUIRE(q.code == 0);
  CHECK(rows_of(q.out)[1][1] == "1");

  CHECK(cli({ "eval", "--model", t.file("m.json"), "--at", "1,2" }).code == 1);
  CHECK(cli({ "eval", "--model", t.file("m.json"), "--functional", "mode" }).code == 1);
  CHECK(cli({ "eval", "--model", t.file("m.json"), "--functional", "mean", "--response", "w" })
          .code == 2);
}

TEST_CASE("classify and local linear from the command line")
{
  TempDir t;
  std::string csv = "g,x\n";
  for (int i = 0; i < 60; ++i)
    csv += (i % 2 ? "a," : "b,") + std::to_string((i % 2 ? 3.0 : -3.0) + 0.01 * i) + "\n";
  spit(t.file("c.csv"), csv);
  REQUIRE(cli({ "fit", "--input", t.file("c.csv"), "--categorical", "g", "--continuous", "x",
                "--model", t.file("k.json") })
            .code == 0);
  const auto c = cli({ "eval", "--model", t.file("k.json"), "--functional", "classify",
                       "--classes", "g", "--at", "3.3" });
  REQUIRE(c.code == 0);
  const auto rows = rows_of(c.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{ "kind", "x", "value", "denominator_mass" });
  CHECK(rows[1][0] == "classify[g=a]");
  CHECK(rows[2][0] == "classify[g=b]");
  CHECK(std::stod(rows[1][2]) > 0.99);
  CHECK(std::abs(std::stod(rows[1][2]) + std::stod(rows[2][2]) - 1.0) < 1e-12);

  std::string lin = "z,x\n";
  for (int i = 0; i < 40; ++i)
    lin += std::to_string(i % 5) + "," + std::to_string(0.1 * i) + "\n";
  spit(t.file("l.csv"), lin);
  REQUIRE(cli({ "fit", "--input", t.file("l.csv"), "--discrete", "z", "--continuous", "x",
                "--type", "loclin", "--response", "x", "--model", t.file("l.json") })
            .code == 0);
  const auto l = cli({ "eval", "--model", t.file("l.json"), "--functional", "mean", "--at", "2" });
  REQUIRE(l.code == 0);
  const auto lrows = rows_of(l.out);
  REQUIRE(lrows.size() == 2);
  CHECK(lrows[0] == std::vector<std::string>{ "kind", "z", "value", "denominator_mass" });
  CHECK(lrows[1][3] == "NA");
  CHECK(cli({ "fit", "--input", t.file("l.csv"), "--discrete", "z", "--continuous", "x", "--type",
              "loclin", "--model", t.file("l2.json") })
          .code == 1);
}

TEST_CASE("benchmark output shape")
{
  TempDir t;
  const auto r = cli({ "benchmark", "--n-grid", "100,200", "--seeds", "3", "--threads", "2",
                       "--output", t.file("b.csv") });
  REQUIRE(r.code == 0);
  const auto rows = rows_of(slurp(t.file("b.csv")));
  REQUIRE(rows.size() == 1 + 2 * 3 * 2);
  CHECK(rows[0] == std::vector<std::string>{ "n", "seed", "functional", "error" });
  CHECK(r.out.find("log-log slope") != std::string::npos);

  const auto single = cli({ "benchmark", "--n-grid", "100,200", "--seeds", "3", "--threads", "1",
                            "--output", t.file("b1.csv") });
  REQUIRE(single.code == 0);
  CHECK(slurp(t.file("b1.csv")) == slurp(t.file("b.csv")));
}

TEST_CASE("config file precedence")
{
  TempDir t;
  spit(t.file("c.json"), R"({"n": 3, "seed": 9, "fit": {"type": "loclin"}})");
  const auto from_config = cli({ "simulate", "--config", t.file("c.json") });
  REQUIRE(from_config.code == 0);
  CHECK(rows_of(from_config.out).size() == 4);
  CHECK(from_config.out == cli({ "simulate", "--n", "3", "--seed", "9" }).out);

  const auto flag_wins = cli({ "simulate", "--config", t.file("c.json"), "--n", "2" });
  REQUIRE(flag_wins.code == 0);
  CHECK(rows_of(flag_wins.out).size() == 3);
  CHECK(flag_wins.out == cli({ "simulate", "--n", "2", "--seed", "9" }).out);

  spit(t.file("s.json"), R"({"simulate": {"n": 1}})");
  CHECK(rows_of(cli({ "simulate", "--config", t.file("s.json") }).out).size() == 2);

  spit(t.file("arr.json"), R"({"n-grid": [100, 150], "seeds": 1, "functionals": ["mean"]})");
  const auto b = cli({ "benchmark", "--config", t.file("arr.json"), "--output", t.file("b.csv") });
  REQUIRE(b.code == 0);
  CHECK(rows_of(slurp(t.file("b.csv"))).size() == 3);

  spit(t.file("unknown.json"), R"({"bogus": 1})");
  CHECK(cli({ "simulate", "--config", t.file("unknown.json") }).code == 1);
  spit(t.file("broken.json"), "{");
  CHECK(cli({ "simulate", "--config", t.file("broken.json") }).code == 1);
}

TEST_CASE("installed binary matches in-process run")
{
  TempDir t;
  const std::string cmd = std::string("\"") + JITTER_CLI_PATH + "\" simulate --n 20 --seed 7 --output \"" +
                          t.file("bin.csv") + "\"";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(slurp(t.file("bin.csv")) == cli({ "simulate", "--n", "20", "--seed", "7" }).out);

  const std::string bad = std::string("\"") + JITTER_CLI_PATH + "\" verify --inject-corrupt-density > \"" +
                          t.file("v.txt") + "\"";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 3);
}
