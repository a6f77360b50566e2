#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "collective/colloc.hpp"
#include "collective/error.hpp"
#include "collective/nodal.hpp"
#include "collective/taylor.hpp"
#include "collective/verify.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace collective;

namespace {

const FunctionPtr one = SpatialFunction::constant(1.0);

AffineDiffusion constant_model(std::vector<double> cs) {
  std::vector<FunctionPtr> psis;
  for (double c : cs) psis.push_back(SpatialFunction::constant(c));
  return AffineDiffusion(one, psis);
}

SpatialField nodal_values(std::uint32_t k, const std::function<double(double)>& g) {
  const std::size_t n = std::size_t{1} << k;
  std::vector<double> v(n - 1);
  for (std::size_t i = 1; i < n; ++i) v[i - 1] = g(static_cast<double>(i) / static_cast<double>(n));
  return SpatialField(k, std::move(v));
}

FunctionPtr sine_load() {
  return std::make_shared<const SpatialFunction>([](double x) { return std::sin(std::numbers::pi * x); },
                                                  [](double x) { return std::numbers::pi * std::cos(std::numbers::pi * x); },
                                                  "sin");
}

AffineDiffusion one_parameter_model() {
  auto psi = std::make_shared<const SpatialFunction>(
      [](double x) { return 0.5 * std::sin(std::numbers::pi * x); },
      [](double x) { return 0.5 * std::numbers::pi * std::cos(std::numbers::pi * x); }, "half-sin");
  return AffineDiffusion(one, {psi});
}

}  // namespace

TEST_CASE("reference solution of the constant model matches x(1-x)/(2a)") {
  auto a = constant_model({0.4});
  for (double y : {-1.0, -0.3, 0.5, 1.0}) {
    std::vector<double> yy{y};
    const double av = 1.0 + 0.4 * y;
    auto want = nodal_values(kReferenceLevel, [&](double x) { return x * (1 - x) / (2 * av); });
    CHECK(v_distance(reference_solution(a, one, yy), want) <= 1e-8);
  }
}

TEST_CASE("reference at y = 0 is the nonparametric solve") {
  auto a = AffineDiffusion::from_preset("one-plus-bump", PsiFamily{0.1, 2.0, 3, "sine"});
  std::vector<double> zero(3, 0.0);
  auto got = reference_solution(a, one, zero, 10);
  auto want = solve(a.abar(), FluxFunctional{one, {}}, 10);
  CHECK(v_distance(got, want) <= 1e-13 * v_norm(want));
  CHECK(v_distance(reference_solution(a, one, {}, 10), got) == 0.0);
}

TEST_CASE("reference is linear in f") {
  auto a = AffineDiffusion::from_preset("one-plus-bump", PsiFamily{0.1, 2.0, 3, "sine"});
  auto g = sine_load();
  auto mix = std::make_shared<const SpatialFunction>(
      [](double x) { return 1.0 + 3.0 * std::sin(std::numbers::pi * x); },
      [](double x) { return 3.0 * std::numbers::pi * std::cos(std::numbers::pi * x); }, "mix");
  std::vector<double> y{0.3, -0.7, 0.9};
  auto lhs = reference_solution(a, mix, y, 11);
  auto rhs = reference_solution(a, one, y, 11);
  rhs.axpy(3.0, reference_solution(a, g, y, 11));
  CHECK(v_distance(lhs, rhs) <= 1e-12 * v_norm(lhs));
}

TEST_CASE("reference is out of domain for |y_j| > 1") {
  auto a = constant_model({0.4, 0.1});
  std::vector<double> y{0.0, 1.5};
  CHECK_THROWS_WITH_AS(reference_solution(a, one, y, 6), doctest::Contains("DomainViolation"), Error);
}

TEST_CASE("reference self-consistency between levels 13 and 12") {
  auto a = AffineDiffusion::from_preset("one-plus-bump", PsiFamily{0.1, 2.0, 4, "sine"});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> y(4);
    for (double& v : y) v = unif(rng);
    auto fine = reference_solution(a, one, y, 13);
    auto coarse = reference_solution(a, one, y, 12);
    CHECK(v_distance(fine, coarse) <= std::ldexp(1.0, -13));
  }
}

TEST_CASE("nodal solver") {
  SUBCASE("constant model is exact at every level") {
    auto a = constant_model({0.4});
    NodalSolver P(a, one, 10);
    std::vector<double> y{-0.5};
    for (std::uint32_t k : {1u, 4u, 10u}) {
      auto want = nodal_values(k, [](double x) { return x * (1 - x) / 1.6; });
      CHECK(v_distance(P(y, k), want) <= 1e-12);
    }
  }
  SUBCASE("a = 1 + x closed form") {
    auto lin = std::make_shared<const SpatialFunction>([](double x) { return 1.0 + x; }, [](double) { return 1.0; },
                                                       "1+x");
    AffineDiffusion a(lin, {});
    const double q0 = 1.0 / std::numbers::ln2 - 1.0;
    auto want = nodal_values(8, [&](double x) { return (q0 + 1.0) * std::log1p(x) - x; });
    NodalSolver P(a, one);
    auto got = P({}, 8);
    double worst = 0.0;
    for (std::size_t i = 0; i < got.dim(); ++i) worst = std::max(worst, std::abs(got.values[i] - want.values[i]));
    CHECK(worst <= 1e-13);
  }
  SUBCASE("coarse levels are restrictions of fine ones") {
    auto a = AffineDiffusion::from_preset("one-plus-bump", PsiFamily{0.1, 2.0, 3, "sine"});
    NodalSolver P(a, sine_load(), 12);
    std::vector<double> y{0.7, -0.2, 0.4};
    auto fine = P(y, 12);
    auto coarse = P(y, 5);
    for (std::size_t i = 0; i < coarse.dim(); ++i) {
      CHECK(coarse.values[i] == doctest::Approx(fine.values[(i + 1) * 128 - 1]).epsilon(1e-12));
    }
  }
  SUBCASE("Galerkin converges to the nodal values") {
    auto a = AffineDiffusion::from_preset("one-plus-bump", PsiFamily{0.1, 2.0, 3, "sine"});
    NodalSolver P(a, one);
    std::vector<double> y{0.7, -0.2, 0.4};
    const double e8 = v_distance(P(y, 8), reference_solution(a, one, y, 8));
    const double e10 = v_distance(P(y, 10), reference_solution(a, one, y, 10));
    CHECK(e10 < e8 / 8);
  }
  SUBCASE("errors") {
    auto a = constant_model({2.0});
    NodalSolver P(a, one, 6);
    std::vector<double> y{-0.9};
    CHECK_THROWS_WITH_AS(P(y, 4), doctest::Contains("EllipticityViolation"), Error);
    std::vector<double> ok{0.1};
    CHECK_THROWS_WITH_AS(P(ok, 7), doctest::Contains("LevelOverflow"), Error);
    std::vector<double> long_y{0.1, 0.1};
    CHECK_THROWS_AS(P(long_y, 3), Error);
  }
}

TEST_CASE("linf samples") {
  auto a = AffineDiffusion::from_preset("one", PsiFamily{0.06, 3.0, 8, "sine"});
  auto S = linf_samples(a, one, SamplerSpec{7, 6, 16});
  REQUIRE(S.points.size() == 64 + 16);
  CHECK(S.seed == 7);
  for (std::size_t i = 0; i < 64; ++i) {
    for (double v : S.points[i]) CHECK(std::abs(v) == 1.0);
  }
  for (std::size_t j = 0; j < 6; ++j) {
    int plus = 0;
    for (std::size_t i = 0; i < 64; ++i) plus += S.points[i][j] > 0;
    CHECK(plus == 32);
  }
  auto again = linf_samples(a, one, SamplerSpec{7, 6, 16});
  CHECK(again.points == S.points);
}

TEST_CASE("error_linf") {
  auto a = AffineDiffusion::from_preset("one-plus-bump", PsiFamily{0.1, 2.0, 2, "sine"});
  auto S = linf_samples(a, one, SamplerSpec{3, 6, 12});
  SUBCASE("exact surrogate") {
    auto e = error_linf(S, [&](std::span<const double> y) { return reference_solution(a, one, y); });
    CHECK(e.value <= 1e-10);
  }
  SUBCASE("projected reference gives the largest projection error") {
    double want = 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < S.points.size(); ++i) {
      const double d = v_distance(S.references[i], project(S.references[i], 5));
      if (d > want) {
        want = d;
        arg = i;
      }
    }
    auto e = error_linf(S, [&](std::span<const double> y) { return project(reference_solution(a, one, y), 5); }, 2);
    CHECK(e.value == doctest::Approx(want).epsilon(1e-12));
    CHECK(e.argmax == S.points[arg]);
  }
}

TEST_CASE("error_l2mu") {
  auto a = one_parameter_model();
  auto mc = mc_samples(a, one, 1000, 99, 1);
  SUBCASE("zero-error surrogate") {
    auto e = error_l2mu(mc, [&](std::span<const double> y) { return reference_solution(a, one, y); });
    CHECK(e.value <= 1e-12);
  }
  SUBCASE("bounded by the sampled sup and cross-checked by Gauss quadrature") {
    const auto u0 = reference_solution(a, one, {});
    Evaluator frozen = [&](std::span<const double>) { return u0; };
    auto l2 = error_l2mu(mc, frozen);
    auto linf = error_linf(linf_samples(a, one), frozen);
    CHECK(l2.std_err > 0.0);
    CHECK(l2.value <= linf.value + 3 * l2.std_err);
    const double mean_sq = boost::math::quadrature::gauss<double, 64>::integrate(
        [&](double y) {
          std::vector<double> yy{y};
          const double d = v_distance(reference_solution(a, one, yy), u0);
          return 0.5 * d * d;
        },
        -1.0, 1.0);
    CHECK(std::abs(l2.value - std::sqrt(mean_sq)) <= 3 * l2.std_err);
  }
  SUBCASE("too few draws for the batches") {
    auto small = mc_samples(a, one, 10, 1, 1);
    CHECK_THROWS_AS(error_l2mu(small, [&](std::span<const double>) { return SpatialField::zero(3); }), Error);
  }
}

TEST_CASE("finite-difference Taylor oracle") {
  auto a = constant_model({0.3});
  auto u0 = solve(*one, FluxFunctional{one, {}}, 9);
  CHECK(v_distance(fd_taylor_oracle(a, one, MultiIndex{}, 9), u0) <= 1e-14);
  auto want = u0;
  want.scale(-0.3);
  CHECK(v_distance(fd_taylor_oracle(a, one, MultiIndex({{1, 1}}), 9), want) <= 1e-8);
  CHECK_THROWS_AS(fd_taylor_oracle(a, one, MultiIndex({{1, 4}}), 9), Error);
}

TEST_CASE("rate_fit") {
  std::vector<double> n{16, 32, 64, 128, 256, 512};
  std::vector<double> e;
  SUBCASE("exact power law") {
    for (double v : n) e.push_back(1.0 / v);
    auto f = rate_fit(n, e);
    CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f.band <= 1e-10);
  }
  SUBCASE("perturbed power law") {
    for (double v : n) e.push_back(3.0 / v * (1.0 + 0.1 * std::sin(v)));
    auto f = rate_fit(n, e);
    CHECK(f.slope >= -1.1);
    CHECK(f.slope <= -0.9);
  }
  SUBCASE("constant errors") {
    e.assign(n.size(), 0.25);
    CHECK(std::abs(rate_fit(n, e).slope) <= 1e-12);
  }
  SUBCASE("degenerate inputs") {
    e.assign(n.size(), 0.25);
    e[2] = 0.0;
    CHECK_THROWS_WITH_AS(rate_fit(n, e), doctest::Contains("DegenerateFit"), Error);
    std::vector<double> n4(n.begin(), n.begin() + 4), e4(4, 1.0);
    CHECK_THROWS_WITH_AS(rate_fit(n4, e4), doctest::Contains("DegenerateFit"), Error);
  }
}

TEST_CASE("error report serialization") {
  ErrorReport r;
  r.method = "taylor";
  r.seed = 42;
  for (int k = 4; k <= 8; ++k) r.rows.push_back({std::int64_t{1} << k, std::ldexp(1.0, -k), 0.0});
  r.constants["r"] = 0.5;
  std::ostringstream csv;
  r.write_csv(csv);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "method,n,error,stderr,seed");
  std::getline(lines, line);
  CHECK(line == "taylor,16,0.0625,0,42");
  std::ostringstream side;
  r.write_sidecar(side);
  auto j = nlohmann::json::parse(side.str());
  CHECK(j["method"] == "taylor");
  CHECK(j["seed"] == 42);
  CHECK(j["constants"]["r"] == 0.5);
  CHECK(j["fit"]["slope"].get<double>() == doctest::Approx(-1.0));
}

TEST_CASE("Taylor and collocation errors agree within a factor 10 and decrease with n") {
  auto a = AffineDiffusion::from_preset("one", PsiFamily{0.06, 3.0, 8, "sine"});
  auto w = superposed_weight(regularity_constants(a, 1.0).b);
  auto samples = linf_samples(a, one, SamplerSpec{20240611, 6, 32});
  double prev = INFINITY;
  for (std::int64_t n : {64, 128, 256, 512, 1024}) {
    auto T = build_taylor(a, one, n, 0.5, w);
    auto C = build_colloc(a, one, n, 0.5, w);
    const double et = error_linf(samples, [&](std::span<const double> y) { return evaluate(T, y); }).value;
    const double ec = error_linf(samples, [&](std::span<const double> y) { return evaluate(C, y); }).value;
    CHECK(et <= 10 * ec);
    CHECK(ec <= 10 * et);
    CHECK(et <= 1.05 * prev);
    prev = et;
  }
}
