#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "nlvar/errors.hpp"
#include "nlvar/io.hpp"

#include <sstream>

using namespace nlvar;
using fixtures::v2;
using nlohmann::json;

namespace {

std::string schema_path(const json& j) {
  try {
    io::model_from_json(j);
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("model JSON round trip for every family") {
  std::mt19937_64 rng(211);
  const std::vector<ModelSpec> models{fixtures::ex_l(), fixtures::ex_t(), fixtures::random_linear_member(rng, 3, 3, 1),
                                      fixtures::random_threshold_member(rng, 3, 2, 2, 3),
                                      fixtures::random_conic_member(rng, 2, 2, 1),
                                      fixtures::random_smoothed_member(rng, 2, 2, 1, 2, 0.3)};
  for (const ModelSpec& m : models) {
    const json j = io::model_to_json(m);
    const ModelSpec back = io::model_from_json(json::parse(j.dump()));
    CHECK(back == m);
    CHECK(io::model_to_json(back) == j);
  }
}

TEST_CASE("a hand-written linear model parses") {
  const json j = json::parse(R"({"type": "linear", "p": 2, "k": 1,
                                 "phi": [[[1, 0], [0, 1]], [[0.5, 0.5], [0, 1]]]})");
  CHECK(io::model_from_json(j) == fixtures::ex_l());
}

TEST_CASE("schema errors name the offending path") {
  json j = io::model_to_json(fixtures::ex_t());
  j["pieces"][0][1].erase("matrix");
  CHECK(schema_path(j) == "/pieces/0/1/matrix");

  j = io::model_to_json(fixtures::ex_t());
  j["pieces"][1][0]["offset"][1] = "x";
  CHECK(schema_path(j) == "/pieces/1/0/offset/1");

  j = io::model_to_json(fixtures::ex_l());
  j.erase("k");
  CHECK(schema_path(j) == "/k");

  j = io::model_to_json(fixtures::ex_l());
  j["type"] = "quadratic";
  CHECK(schema_path(j) == "/type");

  j = io::model_to_json(fixtures::ex_l());
  // The first row fixes the width; the ragged one is reported.
  j["phi"][1][1] = json::array({1.0});
  CHECK(schema_path(j) == "/phi/1/1");

  std::mt19937_64 rng(213);
  j = io::model_to_json(fixtures::random_smoothed_member(rng, 2, 1, 1, 2, 0.3));
  j["base"]["tau"] = 3;
  CHECK(schema_path(j) == "/base/tau");
}

TEST_CASE("matrices and vectors") {
  const Mat m = io::matrix_from_json(json::parse("[[1, 2, 3], [4, 5, 6]]"), "");
  CHECK(m.rows() == 2);
  CHECK(m(1, 2) == 6.0);
  CHECK(io::to_json(m) == json::parse("[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]"));
  CHECK_THROWS_AS(io::matrix_from_json(json::parse("[[1, 2], [3]]"), "/m"), SchemaError);
  CHECK_THROWS_AS(io::vector_from_json(json::parse("{}"), "/v"), SchemaError);
  const auto list = io::matrices_from_json(json::parse(R"({"matrices": [[[1]], [[2]]]})"));
  REQUIRE(list.size() == 2);
  CHECK(list[1](0, 0) == 2.0);
  CHECK(io::matrices_from_json(json::parse("[[[1]]]")).size() == 1);
}

TEST_CASE("membership report JSON") {
  const json j = io::to_json(check_membership(fixtures::ex_l()));
  CHECK(j["verdict"] == "Member");
  CHECK(j["r"] == 1);
  CHECK(j["jsr"]["upper"].get<double>() < 1.0);
  CHECK(j["betas"].size() == 1);
}

TEST_CASE("transitory config") {
  const json j = json::parse(R"({"alpha_inner": [-1, -0.5], "alpha_outer": [-1, -0.25], "beta": [1, -1],
                                 "grid": {"from": 0, "to": 10, "count": 5}, "tol": 1e-8})");
  const TransitoryConfig c = io::transitory_from_json(j);
  REQUIRE(c.magnitudes.size() == 5);
  CHECK(c.magnitudes[1] == 2.5);
  CHECK(c.tol == 1e-8);
  CHECK(c.horizon == 100000);
  json k = j;
  k.erase("beta");
  CHECK_THROWS_AS(io::transitory_from_json(k), SchemaError);
}

TEST_CASE("doubles print losslessly") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(std::stod(io::format_double(x)) == x);
  }
}

TEST_CASE("CSV reading and writing") {
  std::ostringstream out;
  Mat rows(2, 2);
  rows << 0.1, -2.0, 1.0 / 3.0, 4.0;
  io::write_csv(out, {"a", "b"}, rows, "made by a test");
  CHECK(out.str().rfind("# made by a test\na,b\n", 0) == 0);

  std::istringstream in(out.str());
  const io::CsvTable t = io::parse_csv(in, "mem");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  CHECK(t.rows == rows);

  std::istringstream bare("1,2\n\n3,4\n");
  const io::CsvTable b = io::parse_csv(bare, "bare");
  CHECK(b.header.empty());
  CHECK(b.rows.rows() == 2);

  std::istringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(io::parse_csv(ragged, "ragged"), InputError);
  std::istringstream junk("a,b\n1,zz\n");
  CHECK_THROWS_AS(io::parse_csv(junk, "junk"), InputError);
  CHECK_THROWS_AS(io::read_csv("/nonexistent/file.csv"), InputError);
}

TEST_CASE("path tables round trip") {
  std::mt19937_64 rng(217);
  const ModelSpec m = fixtures::random_threshold_member(rng, 2, 3, 1, 2);
  const PathResult path = simulate(m, fixtures::random_matrix(rng, 3, 2), GaussianShocks{Mat::Identity(2, 2), 4, 25});
  const io::CsvTable t = io::path_table(path);
  CHECK(t.header == std::vector<std::string>{"t", "z1", "z2", "u1", "u2"});
  CHECK(t.rows.rows() == 28);
  CHECK(t.rows(0, 0) == -2.0);
  std::ostringstream out;
  io::write_csv(out, t.header, t.rows);
  std::istringstream in(out.str());
  const PathResult back = io::path_from_table(io::parse_csv(in, "path"), 2, 3);
  CHECK(back.path == path.path);
  CHECK(back.window0 == path.window0);
  CHECK(back.shocks == path.shocks);
}

TEST_CASE("decomposition table layout") {
  const ModelSpec m = fixtures::ex_t();
  const MembershipReport rep = check_membership(m);
  const PathResult path = simulate(m, Mat::Zero(1, 2), GaussianShocks{Mat::Identity(2, 2), 1, 10});
  const io::CsvTable t = io::decomposition_table(decompose(m, rep, path), rep);
  CHECK(t.header == std::vector<std::string>{"t", "psi1", "theta1", "xi1", "residual"});
  CHECK(t.rows.rows() == 10);
  CHECK(t.rows(9, 0) == 10.0);
}
