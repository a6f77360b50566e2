#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "collective/cli.hpp"
#include "collective/error.hpp"
#include "doctest.h"

using namespace collective;
namespace fs = std::filesystem;

namespace {

const char* kBase = R"(# acceptance model
[model]
abar = one
J = 8
amplitude = 0.06
decay = 3.0
shape = sine

[method]
name = taylor
p = 0.5   ; inline comment

[run]
budgets = 16, 32, 64, 128, 256
)";

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.ini");
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

ErrorCode code_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parse a complete experiment file") {
  auto c = parse(kBase);
  CHECK(c.abar == "one");
  CHECK(c.family.count == 8);
  CHECK(c.family.amplitude == 0.06);
  CHECK(c.family.shape == "sine");
  CHECK(c.method == Method::Taylor);
  CHECK(c.resolved_p() == 0.5);
  CHECK(c.budgets == std::vector<std::int64_t>{16, 32, 64, 128, 256});
  CHECK(c.seed == 20240611);
  CHECK(c.k_ref == kReferenceLevel);

  auto g = parse(replace(replace(kBase, "name = taylor", "name = galerkin-l2"), "p = 0.5", "p = auto"));
  CHECK(g.resolved_p() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("malformed experiment files are ConfigError") {
  CHECK(code_of(replace(kBase, "abar = one", "")) == ErrorCode::ConfigError);
  CHECK(code_of(replace(kBase, "name = taylor", "name = simplex")) == ErrorCode::ConfigError);
  CHECK(code_of(replace(kBase, "decay = 3.0", "decay = fast")) == ErrorCode::ConfigError);
  CHECK(code_of(replace(kBase, "decay = 3.0", "decya = 3.0")) == ErrorCode::ConfigError);
  CHECK(code_of(replace(kBase, "[run]", "[runs]")) == ErrorCode::ConfigError);
  CHECK(code_of(replace(kBase, "16, 32", "32, 16")) == ErrorCode::ConfigError);
  CHECK(code_of(replace(kBase, "16, 32", "0, 32")) == ErrorCode::ConfigError);
  CHECK(code_of(replace(kBase, "p = 0.5", "p = 1.5")) == ErrorCode::ConfigError);
  CHECK(code_of(replace(kBase, "name = taylor", "name = taylor\nweight = split")) == ErrorCode::ConfigError);
  CHECK(code_of(std::string("abar = one\n") + kBase) == ErrorCode::ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/experiment.ini"), Error);
}

TEST_CASE("budget lists") {
  CHECK(parse_budgets("4,8, 16") == std::vector<std::int64_t>{4, 8, 16});
  CHECK_THROWS_AS(parse_budgets(""), Error);
  CHECK_THROWS_AS(parse_budgets("8,8"), Error);
  CHECK_THROWS_AS(parse_budgets("8,x"), Error);
}

TEST_CASE("gates on the acceptance model and a doubled amplitude") {
  std::ostringstream out;
  CHECK(gates(parse(kBase), out));
  CHECK(out.str().find("||b||_1 = 0.48") != std::string::npos);
  CHECK(out.str().find("configured method taylor: pass") != std::string::npos);

  std::ostringstream split;
  CHECK(gates(parse(replace(kBase, "name = taylor", "name = colloc\nweight = split")), split));
  CHECK(split.str().find("j0 = 8") != std::string::npos);

  std::ostringstream doubled;
  CHECK_FALSE(gates(parse(replace(kBase, "amplitude = 0.06", "amplitude = 0.12")), doubled));
  CHECK(doubled.str().find("FAIL") != std::string::npos);
}

TEST_CASE("run exit codes and artifacts") {
  const auto root = fs::temp_directory_path() / "collective_cli_test";
  fs::remove_all(root);

  SUBCASE("unknown preset exits 2 without artifacts") {
    auto c = parse(replace(kBase, "abar = one", "abar = two"));
    c.out = root / "unknown";
    std::ostringstream log;
    CHECK(run(c, log) == kExitGate);
    CHECK_FALSE(fs::exists(c.out));
  }
  SUBCASE("gate failure exits 2 without artifacts") {
    auto c = parse(replace(kBase, "amplitude = 0.06", "amplitude = 0.12"));
    c.out = root / "gate";
    std::ostringstream log;
    CHECK(run(c, log) == kExitGate);
    CHECK_FALSE(fs::exists(c.out));
  }
  SUBCASE("byte-identical output across runs and job counts") {
    auto c = parse(kBase);
    c.out = root / "a";
    c.write_surrogates = true;
    std::ostringstream log;
    REQUIRE(run(c, log) == kExitOk);
    auto d = c;
    d.out = root / "b";
    d.jobs = 3;
    REQUIRE(run(d, log) == kExitOk);
    for (const char* f : {"taylor.csv", "taylor.json", "audit.csv"}) {
      CHECK(fs::exists(c.out / f));
      CHECK(slurp(c.out / f) == slurp(d.out / f));
    }
    CHECK(fs::exists(c.out / "surrogates" / "n256" / "meta.txt"));
    CHECK(slurp(c.out / "taylor.csv").rfind("method,n,error,stderr,seed\n", 0) == 0);
  }
  SUBCASE("galerkin-l2 writes a CG log") {
    auto c = parse(replace(replace(kBase, "name = taylor", "name = galerkin-l2"), "p = 0.5", "p = auto"));
    c.out = root / "gal";
    c.budgets = {16, 32, 64};
    std::ostringstream log;
    CHECK(run(c, log) == kExitOk);
    CHECK(fs::exists(c.out / "cg.csv"));
  }
  fs::remove_all(root);
}
