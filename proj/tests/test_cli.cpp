#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "finsler/curvature.hpp"
#include "finsler/scene.hpp"

using namespace finsler;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "finsler");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const std::string kDemo = FINSLER_DEMO_SCENE;

std::filesystem::path temp_file(const std::string& name, const std::string& content = {}) {
  const auto path = std::filesystem::temp_directory_path() / ("finsler_test_" + name);
  if (!content.empty()) std::ofstream(path) << content;
  return path;
}

Matrix as_matrix(const json& j) {
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

}  // namespace

TEST_CASE("tensor on the ratio-square product") {
  const auto r = run({"tensor", kDemo, "--metric", "prod_sq", "--x", "0,0", "--y", "1,1", "--json"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = json::parse(r.out);
  Matrix h(2, 2);
  h << 12, -8, -8, 6;
  CHECK(max_abs(as_matrix(j["h"]) - h) < 1e-12);
  CHECK(max_abs(as_matrix(j["closed_form_blocks"]["assembled"]) - h) < 1e-12);
  Matrix inv(2, 2);
  inv << 0.75, 1, 1, 1.5;
  CHECK(max_abs(as_matrix(j["closed_form_inverse"]["assembled"]) - inv) < 1e-12);

  const auto human = run({"tensor", kDemo, "--metric", "prod_sq", "--x", "0,0", "--y", "1,1"});
  CHECK(human.code == 0);
  CHECK(human.out.find("h =") != std::string::npos);
  CHECK(human.out.find("-8") != std::string::npos);
}

TEST_CASE("einstein on the round sphere") {
  const auto r = run({"einstein", kDemo, "--metric", "sphere", "--x", "0.785,0", "--json"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = json::parse(r.out);
  CHECK(std::abs(j["lambda_hat"].get<double>() - 1.0) < 1e-6);
  CHECK(j["verdict"] == "einstein");
  CHECK(j["samples"].size() == 8);

  const auto human = run({"einstein", kDemo, "--metric", "sphere", "--x", "0.785,0", "--samples", "12"});
  CHECK(human.code == 0);
  CHECK(human.out.find("einstein") != std::string::npos);
  CHECK(run({"einstein", kDemo, "--metric", "sphere", "--x", "0.785,0", "--samples", "7"}).code == cli::kExitInputError);
}

TEST_CASE("curvature in both Ricci tensor modes") {
  const auto jet = json::parse(run({"curvature", kDemo, "--metric", "sphere", "--x", "0.7853981633974483,0", "--y", "0,1", "--json"}).out);
  const auto fd = json::parse(
      run({"curvature", kDemo, "--metric", "sphere", "--x", "0.7853981633974483,0", "--y", "0,1", "--json", "--fd"}).out);
  CHECK(jet["ric"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(jet["spray"][0].get<double>() == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(max_abs(as_matrix(jet["ric_tensor"]) - as_matrix(fd["ric_tensor"])) < 1e-6);
  CHECK(fd["ricci_tensor_mode"] != jet["ricci_tensor_mode"]);
}

TEST_CASE("JSON output re-parses bit-exactly") {
  const auto scene = load_scene(kDemo);
  const auto m = scene.metric("randers");
  const std::vector<double> x{0.1, 0.2};
  const std::vector<double> y{0.3, -0.7};
  const auto r = run({"curvature", kDemo, "--metric", "randers", "--x", "0.1,0.2", "--y", "0.3,-0.7", "--json"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  const auto report = curvature_report(m, x, y);
  CHECK(j["f_squared"].get<double>() == report.f_squared);
  CHECK(j["ric"].get<double>() == report.ric);
  CHECK((as_matrix(j["g"]).array() == report.g.array()).all());
  CHECK((as_matrix(j["ric_tensor"]).array() == report.ric_tensor.array()).all());
  CHECK((as_matrix(j["riemann"]).array() == report.riemann.array()).all());
}

TEST_CASE("human output renders 17 significant digits") {
  const auto r = run({"tensor", kDemo, "--metric", "randers", "--x", "0.1,0.2", "--y", "0.3,-0.7"});
  REQUIRE(r.code == 0);
  const auto scene = load_scene(kDemo);
  const std::vector<double> x{0.1, 0.2};
  const std::vector<double> y{0.3, -0.7};
  const double f2 = f_squared(scene.metric("randers"), x, y);
  const auto pos = r.out.find("F^2 = ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::strtod(r.out.c_str() + pos + 6, nullptr) == f2);
}

TEST_CASE("verify exits 0 on the demo scene and is deterministic") {
  const auto a = run({"verify", kDemo, "--json"});
  CHECK(a.code == cli::kExitOk);
  const auto b = run({"verify", kDemo, "--json"});
  CHECK(a.out == b.out);
  const auto j = json::parse(a.out);
  CHECK(j["passed"] == true);
  CHECK(j["seed"] == 0);
  CHECK(json::parse(run({"verify", kDemo, "--json", "--seed", "5"}).out)["seed"] == 5);
  const auto human = run({"verify", kDemo});
  CHECK(human.code == 0);
  CHECK(human.out.find("consistent with") != std::string::npos);
}

TEST_CASE("validate reports and fails on bad metrics") {
  CHECK(run({"validate", kDemo}).code == cli::kExitOk);
  const auto bad = temp_file("bad_randers.json", R"j({"metrics": {"r": {"type": "randers", "dim": 2,
      "a": [["1", "0"], ["1"]], "b": ["1.2", "0"]}}})j");
  const auto v = run({"validate", bad.string()});
  CHECK(v.code == cli::kExitCheckFailed);
  CHECK(v.out.find("beta-norm") != std::string::npos);
  const auto verify = run({"verify", bad.string()});
  CHECK(verify.code == cli::kExitInputError);
}

TEST_CASE("input errors exit 2 and name the field") {
  auto r = run({"tensor", kDemo, "--metric", "nope", "--x", "0,0", "--y", "1,1"});
  CHECK(r.code == cli::kExitInputError);
  CHECK(r.err.find("--metric") != std::string::npos);

  r = run({"tensor", kDemo, "--metric", "sphere", "--x", "0,a", "--y", "1,1"});
  CHECK(r.code == cli::kExitInputError);
  CHECK(r.err.find("--x") != std::string::npos);

  r = run({"tensor", kDemo, "--metric", "sphere", "--x", "1,0", "--y", "1,1,1"});
  CHECK(r.code == cli::kExitInputError);
  CHECK(r.err.find("--y") != std::string::npos);

  const auto empty = temp_file("empty.json", R"j({"metrics": {}})j");
  r = run({"verify", empty.string()});
  CHECK(r.code == cli::kExitInputError);
  CHECK(r.err.find("no metrics defined") != std::string::npos);

  const auto unknown = temp_file("unknown.json", R"j({"metrics": {"e": {"type": "euclidean", "dim": 2, "oops": 1}}})j");
  r = run({"validate", unknown.string()});
  CHECK(r.code == cli::kExitInputError);
  CHECK(r.err.find("metrics.e.oops") != std::string::npos);

  CHECK(run({"verify", "/nonexistent.json"}).code == cli::kExitInputError);
  CHECK(run({"frobnicate"}).code == cli::kExitInputError);
  CHECK(run({"tensor", kDemo, "--metric", "sphere", "--x", "1,0", "--y", "0,0"}).code == cli::kExitInputError);
}

TEST_CASE("geodesic writes the trace CSV") {
  const auto path = temp_file("trace.csv");
  const auto r = run({"geodesic", kDemo, "--metric", "sphere", "--x0", "1.5707963267948966,0", "--y0", "0,1", "--t-max",
                      "3.141592653589793", "--dt", "1e-3", "--out", path.string()});
  REQUIRE(r.code == cli::kExitOk);
  std::ifstream in(path);
  std::string line, last;
  std::getline(in, line);
  CHECK(line == "t,x1,x2,y1,y2,F");
  int rows = 0;
  while (std::getline(in, line)) {
    last = line;
    ++rows;
  }
  CHECK(rows == 3143);
  std::vector<double> cols;
  std::stringstream ss(last);
  for (std::string cell; std::getline(ss, cell, ',');) cols.push_back(std::stod(cell));
  REQUIRE(cols.size() == 6);
  CHECK(cols[0] == 3.141592653589793);
  CHECK(std::abs(cols[2] - 3.141592653589793) < 1e-6);

  const auto exit_path = temp_file("exit.csv");
  const auto scene = temp_file("exit_scene.json", R"j({"metrics": {"r": {"type": "randers", "dim": 2,
      "a": [["1", "0"], ["1"]], "b": ["0.2*x1", "0"]}}})j");
  const auto e = run({"geodesic", scene.string(), "--metric", "r", "--x0", "0,0", "--y0", "1,0", "--t-max", "10", "--dt",
                      "0.01", "--out", exit_path.string()});
  CHECK(e.code == cli::kExitCheckFailed);
  CHECK(std::filesystem::exists(exit_path));
}
