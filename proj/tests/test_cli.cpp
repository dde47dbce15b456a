#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "pspline/cli.hpp"
#include "pspline/experiments.hpp"

using namespace pspline;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "pspline");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "pspline_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

double truth(double x) { return std::sin(2.0 * std::numbers::pi * x); }

std::string sine_csv(const std::string& name, double sd = 0.3, bool weights = false) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, sd);
  std::uniform_real_distribution<double> uw(0.5, 1.5);
  std::ostringstream os;
  os.precision(17);
  os << (weights ? "x,y,w\n" : "x,y\n");
  for (int i = 0; i < 400; ++i) {
    const double x = (i + 0.5) / 400.0;
    os << x << ',' << truth(x) + noise(rng);
    if (weights) os << ',' << uw(rng);
    os << '\n';
  }
  return write_file(name, os.str());
}

}  // namespace

TEST_CASE("interval: schema and containment") {
  const std::string in = sine_csv("sine.csv");
  const Result r = run({"interval", "--input", in});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["schema"] == 1);
  for (const char* key : {"rho_lo", "rho_hi", "kind", "kappa", "q", "lambda_max", "lambda_min", "lambda_mean",
                          "singular", "rho_star_max", "rho_hat_max"})
    CHECK(j.contains(key));
  CHECK(j["kind"] == "heuristic");
  CHECK(j["rho_lo"].get<double>() < j["rho_hi"].get<double>());

  // recompute the true spectrum for the same configuration
  cli::SmoothConfig cfg;
  cfg.input = in;
  const cli::Table t = cli::read_table(cfg);
  const KnotVector kv = cli::knots_for(t, cfg);
  const PlsProblem prob(design_matrix(kv, t.x), t.y, std::nullopt, cli::penalty_for(kv, cfg));
  const Vectord all = all_eigenvalues(build_E(prob.factor(), prob.penalty()));
  const double q = static_cast<double>(all.size());
  CHECK(j["q"] == all.size());
  CHECK(redf(j["rho_lo"].get<double>(), all) >= 0.99 * q);
  CHECK(redf(j["rho_star_max"].get<double>(), all) <= 0.01 * q);

  const json wide = json::parse(run({"interval", "--input", in, "--kappa", "0.25"}).out);
  CHECK(wide["rho_hi"].get<double>() - wide["rho_lo"].get<double>() <
        j["rho_hi"].get<double>() - j["rho_lo"].get<double>());

  const Result csv = run({"interval", "--input", in, "--format", "csv", "--mode", "wide"});
  CHECK(csv.code == 0);
  CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 2);
}

TEST_CASE("exit codes and malformed input") {
  const std::string bad = write_file("bad.csv", "x,y\n1,2\n3\n4,5\n");
  const Result r = run({"interval", "--input", bad});
  CHECK(r.code == 3);
  CHECK(r.out.empty());
  CHECK(run({"interval", "--input", write_file("nan.csv", "x,y\n1,abc\n")}).code == 3);
  CHECK(run({"interval", "--input", write_file("col.csv", "a,b\n1,2\n")}).code == 3);
  CHECK(run({"interval", "--input", (scratch_dir() / "missing.csv").string()}).code == 3);

  const std::string in = sine_csv("sine2.csv");
  CHECK(run({"interval", "--input", in, "--penalty", "foo"}).code == 2);
  CHECK(run({"interval", "--input", in, "-m", "4"}).code == 2);
  CHECK(run({"interval", "--input", in, "--kappa", "0.7"}).code == 2);
  CHECK(run({"interval"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"interval", "--input", in, "--knots", "500"}).code == 3);  // p >= n
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("fit: accuracy, constant data, both criteria") {
  const std::string in = sine_csv("fit.csv", 0.3);
  const Result r = run({"fit", "--input", in});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j["fits"].size() == 2);
  CHECK(j["fits"][0]["criterion"] == "gcv");
  CHECK(j["fits"][1]["criterion"] == "reml");
  const auto x = j["x"].get<std::vector<double>>();
  for (const char* c : {"gcv", "reml"}) {
    const auto yh = j["y_hat"][c].get<std::vector<double>>();
    double se = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) se += std::pow(yh[i] - truth(x[i]), 2);
    CHECK(std::sqrt(se / static_cast<double>(x.size())) < 0.3);
  }
  CHECK(j["curve"]["x"].size() == 200);

  std::ostringstream os;
  os << "x,y\n";
  for (int i = 0; i < 100; ++i) os << i * 0.37 << ",2.5\n";
  const Result c = run({"fit", "--input", write_file("const.csv", os.str()), "--criterion", "gcv"});
  REQUIRE(c.code == 0);
  const json jc = json::parse(c.out);
  CHECK(jc["fits"].size() == 1);
  for (double v : jc["y_hat"]["gcv"].get<std::vector<double>>()) CHECK(std::abs(v - 2.5) < 1e-6);

  const Result csv = run({"fit", "--input", in, "--format", "csv", "--criterion", "reml"});
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("kind,x,y,fit_reml\n", 0) == 0);
  CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 1 + 400 + 200);
}

TEST_CASE("curves: rows, monotone edf, agreement with fit") {
  const std::string in = sine_csv("curves.csv");
  const Result r = run({"curves", "--input", in, "--format", "csv", "--grid", "37"});
  REQUIRE(r.code == 0);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  CHECK(line == "rho,edf,gcv,reml");
  std::vector<double> edf;
  while (std::getline(is, line)) {
    std::stringstream ls(line);
    std::string rho, e;
    std::getline(ls, rho, ',');
    std::getline(ls, e, ',');
    edf.push_back(std::stod(e));
  }
  CHECK(edf.size() == 37);
  for (std::size_t i = 1; i < edf.size(); ++i) CHECK(edf[i] <= edf[i - 1]);

  const json curves = json::parse(run({"curves", "--input", in}).out);
  const json fit = json::parse(run({"fit", "--input", in}).out);
  CHECK(curves["interval"] == fit["interval"]);
  for (const auto& f : fit["fits"]) {
    const std::size_t i = f["index"].get<std::size_t>();
    const std::string c = f["criterion"];
    CHECK(curves[c][i].get<double>() == f["value"].get<double>());
    CHECK(curves["rho"][i].get<double>() == f["rho"].get<double>());
  }
  const json interval = json::parse(run({"interval", "--input", in}).out);
  CHECK(interval == fit["interval"]);
}

TEST_CASE("curves: two GCV minima on two-scale data") {
  const Dataset ds = two_scale_data();
  std::ostringstream os;
  os.precision(17);
  os << "x,y\n";
  for (std::size_t i = 0; i < ds.x.size(); ++i) os << ds.x[i] << ',' << ds.y[i] << '\n';
  const std::string in = write_file("two_scale.csv", os.str());
  const json j = json::parse(run({"curves", "--input", in}).out);
  CHECK(j["gcv_local_minima"].get<int>() >= 2);
}

TEST_CASE("same flags give identical bytes; output files") {
  const std::string in = sine_csv("det.csv", 0.3, true);
  const std::vector<std::string> args = {"fit", "--input", in, "--w-col", "w", "--penalty", "os", "--seed", "5"};
  const Result a = run(args);
  const Result b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);

  const std::string path = (scratch_dir() / "out.json").string();
  std::vector<std::string> to_file = args;
  to_file.insert(to_file.end(), {"--output", path});
  const Result c = run(to_file);
  CHECK(c.code == 0);
  CHECK(c.out.empty());
  std::ifstream f(path);
  const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(text == a.out);

  for (const char* pen : {"gps", "sps", "os"})
    CHECK(run({"interval", "--input", in, "--penalty", pen, "-d", "3", "-m", "1"}).code == 0);
}

TEST_CASE("ISO dates become day offsets") {
  std::ostringstream os;
  os << "date,deaths\n";
  std::mt19937_64 rng(3);
  std::poisson_distribution<int> pois(5);
  int kept = 0;
  for (int day = 0; day < 300; ++day) {
    if (day % 4 == 3) continue;  // unreported days are absent
    const auto ymd = std::chrono::year_month_day(std::chrono::sys_days(std::chrono::year{2020} / 3 / 1) +
                                                 std::chrono::days(day));
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    os << buf << ',' << pois(rng) << '\n';
    ++kept;
  }
  const std::string in = write_file("dates.csv", os.str());
  cli::SmoothConfig cfg;
  cfg.input = in;
  cfg.x_col = "date";
  cfg.y_col = "deaths";
  const cli::Table t = cli::read_table(cfg);
  CHECK(t.x_is_date);
  CHECK(t.first_date == "2020-03-01");
  CHECK(t.x.size() == static_cast<std::size_t>(kept));
  CHECK(t.x[0] == 0.0);
  CHECK(t.x[3] == 4.0);
  CHECK(t.x.back() == 298.0);

  const Result r = run({"interval", "--input", in, "--x-col", "date", "--y-col", "deaths"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["first_date"] == "2020-03-01");
  CHECK(run({"interval", "--input", write_file("baddate.csv", "d,y\n2020-02-30,1\n2020-03-01,2\n"), "--x-col", "d"})
            .code == 3);
}

TEST_CASE("simulate and bench pass through") {
  const Result s = run({"simulate", "--scenario", "3,7", "--p", "20", "--reps", "4"});
  REQUIRE(s.code == 0);
  const json j = json::parse(s.out);
  CHECK(j["schema"] == 1);
  REQUIRE(j["reports"].size() == 2);
  CHECK(j["reports"][1]["scenario"] == 7);
  CHECK(j["reports"][0]["density"]["counts"].size() == 50);
  const Result s2 = run({"simulate", "--scenario", "3,7", "--p", "20", "--reps", "4"});
  CHECK(s.out == s2.out);
  const Result csv = run({"simulate", "--scenario", "1,2", "--p", "20", "--reps", "3", "--format", "csv"});
  CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 1 + 6);
  CHECK(run({"simulate", "--scenario", "9"}).code == 2);

  const Result b = run({"bench", "--p-list", "30,60", "--reps", "1", "--format", "json"});
  REQUIRE(b.code == 0);
  const json jb = json::parse(b.out);
  CHECK(jb["p"].size() == 2);
  CHECK(jb.contains("slopes"));
  CHECK(run({"bench", "--p-list", "60,30", "--reps", "1"}).code == 2);
}
