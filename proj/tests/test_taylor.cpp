#include <cmath>
#include <numbers>

#include "collective/error.hpp"
#include "collective/taylor.hpp"
#include "collective/verify.hpp"
#include "doctest.h"

using namespace collective;

namespace {

AffineDiffusion constant_model(std::vector<double> cs) {
  std::vector<FunctionPtr> psis;
  for (double c : cs) psis.push_back(SpatialFunction::constant(c));
  return AffineDiffusion(SpatialFunction::constant(1.0), psis);
}

DownwardClosedSet box(std::uint32_t dims, std::uint32_t m) {
  std::set<MultiIndex> out;
  std::vector<std::uint32_t> e(dims, 0);
  while (true) {
    out.insert(MultiIndex::from_dense(e));
    std::size_t i = 0;
    for (; i < dims; ++i) {
      if (++e[i] <= m) break;
      e[i] = 0;
    }
    if (i == dims) break;
  }
  return DownwardClosedSet(out);
}

double rel_distance(const SpatialField& a, const SpatialField& b) { return v_distance(a, b) / v_norm(b); }

const FunctionPtr one = SpatialFunction::constant(1.0);

}  // namespace

TEST_CASE("geometric coefficients of the one-parameter constant model") {
  const double c = 0.3;
  auto a = constant_model({c});
  auto t = taylor_coeffs(a, one, box(1, 6), 8);
  auto u0 = solve(*one, FluxFunctional{one, {}}, 8);
  CHECK(t.at(MultiIndex{}) == u0);
  for (std::uint32_t k = 1; k <= 6; ++k) {
    auto expect = u0;
    expect.scale(std::pow(-c, k));
    CHECK(rel_distance(t.at(MultiIndex({{1, k}})), expect) < 1e-10);
  }
}

TEST_CASE("mixed coefficient of the two-parameter constant model") {
  const double c1 = 0.2, c2 = 0.35;
  auto a = constant_model({c1, c2});
  auto t = taylor_coeffs(a, one, box(2, 2), 9);
  auto u0 = solve(*one, FluxFunctional{one, {}}, 9);
  // u = u0 / (1 + c1 y1 + c2 y2): the y1 y2 coefficient is 2 c1 c2 u0.
  auto expect = u0;
  expect.scale(2 * c1 * c2);
  CHECK(rel_distance(t.at(MultiIndex({{1, 1}, {2, 1}})), expect) < 1e-10);
  auto fd = fd_taylor_oracle(a, one, MultiIndex({{1, 1}, {2, 1}}), 9);
  CHECK(rel_distance(fd, expect) < 1e-6);
}

TEST_CASE("coefficients agree with the finite-difference oracle") {
  auto a = AffineDiffusion::from_preset("one-plus-bump", PsiFamily{0.3, 2.0, 2, "sine"});
  auto t = taylor_coeffs(a, one, box(2, 2), 10);
  for (const auto& [s, ts] : t) {
    if (s.order() > 2) continue;
    auto fd = fd_taylor_oracle(a, one, s, 10);
    CAPTURE(s.to_string());
    CHECK(v_distance(fd, ts) <= 1e-6 * std::max(1.0, v_norm(ts)));
  }
}

TEST_CASE("recursion errors") {
  auto a = constant_model({0.2, 0.1});
  std::map<MultiIndex, std::uint32_t> gap{{MultiIndex{}, 4}, {MultiIndex({{1, 2}}), 4}};
  CHECK_THROWS_WITH_AS(taylor_coeffs(a, one, gap, 1), doctest::Contains("NotLowerSet"), Error);
  std::map<MultiIndex, std::uint32_t> rising{{MultiIndex{}, 3}, {MultiIndex::unit(1), 4}};
  CHECK_THROWS_AS(taylor_coeffs(a, one, rising, 1), Error);
  std::map<MultiIndex, std::uint32_t> far{{MultiIndex{}, 3}, {MultiIndex::unit(3), 3}};
  CHECK_THROWS_AS(taylor_coeffs(a, one, far, 1), Error);
}

TEST_CASE("recursion is linear in f") {
  auto a = AffineDiffusion::from_preset("one", PsiFamily{0.2, 2.0, 3, "sine"});
  auto three = SpatialFunction::constant(3.0);
  auto t1 = taylor_coeffs(a, one, box(3, 1), 7);
  auto t3 = taylor_coeffs(a, three, box(3, 1), 7);
  for (const auto& [s, v] : t1) {
    auto scaled = v;
    scaled.scale(3.0);
    CHECK(v_distance(scaled, t3.at(s)) <= 1e-12 * std::max(1.0, v_norm(scaled)));
  }
}

TEST_CASE("coefficient decay bound on a constant-coefficient fixture") {
  std::vector<double> cs{0.15, 0.1, 0.05};
  auto a = constant_model(cs);
  auto rc = regularity_constants(a, 1.0);
  auto t = taylor_coeffs(a, one, box(3, 3), 8);
  for (const auto& [s, ts] : t) {
    double bound = rc.K * multinomial(s);
    for (const auto& e : s.entries()) bound *= std::pow(rc.b[e.dim - 1], e.exp);
    CHECK(v_norm(ts) <= bound);
  }
}

TEST_CASE("build_taylor budgets") {
  auto a = AffineDiffusion::from_preset("one", PsiFamily{0.06, 3.0, 8, "sine"});
  auto rc = regularity_constants(a, 1.0);
  auto weight = superposed_weight(rc.b);

  auto tiny = build_taylor(a, one, 1, 0.5, weight);
  CHECK(tiny.rank() <= 1);
  std::vector<double> y(8, 0.3);
  CHECK(v_norm(evaluate(tiny, y)) == 0.0);

  std::set<LevelIndex> prev;
  for (std::int64_t n : {16, 64, 256, 1024}) {
    auto S = build_taylor(a, one, n, 0.5, weight);
    CHECK(S.rank() <= static_cast<std::uint64_t>(n));
    CHECK(S.rank() == work_bound(S.G));
    std::set<LevelIndex> keys;
    for (const auto& [key, field] : S.details) {
      CHECK(field.level == key.first);
      CHECK(S.G.contains(key.first, key.second));
      keys.insert(key);
    }
    CHECK(keys.size() == S.G.size());
    CHECK(std::includes(keys.begin(), keys.end(), prev.begin(), prev.end()));
    prev = keys;
  }

  auto bad = superposed_weight({0.7, 0.4});
  CHECK_THROWS_AS(build_taylor(a, one, 64, 0.5, bad), Error);
}

TEST_CASE("evaluation") {
  auto a = constant_model({0.2});
  auto rc = regularity_constants(a, 1.0);
  auto weight = superposed_weight(rc.b);
  auto S = build_taylor(a, one, 4096, 0.5, weight);
  REQUIRE_FALSE(S.G.empty());

  // y = 0 keeps only s = 0.
  std::vector<double> zero{0.0};
  auto t0 = solve(*one, FluxFunctional{one, {}}, *S.G.kappa(MultiIndex{}));
  auto at0 = evaluate(S, zero);
  CHECK(v_distance(at0, t0) <= 1e-13);

  std::vector<double> half{0.5};
  auto exact = reference_solution(a, one, half);
  double err_big = v_distance(evaluate(S, half), exact);
  double err_small = v_distance(evaluate(build_taylor(a, one, 256, 0.5, weight), half), exact);
  CHECK(err_big < err_small);
  CHECK(err_big < 2e-3);

  std::vector<double> outside{1.5};
  CHECK_THROWS_WITH_AS(evaluate(S, outside), doctest::Contains("DomainViolation"), Error);
  CHECK_THROWS_AS(evaluate(S, std::vector<double>{}), Error);

  TaylorSurrogate single;
  single.details.emplace(LevelIndex{3, MultiIndex{}}, SpatialField(3, {1, 2, 3, 4, 5, 6, 7}));
  CHECK(evaluate(single, half) == single.details.begin()->second);
}

TEST_CASE("parity identity") {
  auto a = AffineDiffusion::from_preset("one-plus-bump", PsiFamily{0.04, 2.0, 4, "sine"});
  auto weight = superposed_weight(regularity_constants(a, 1.0).b);
  auto S = build_taylor(a, one, 512, 0.5, weight);
  auto flipped = S;
  for (auto& [key, field] : flipped.details) {
    if (key.second.order() % 2 == 1) field.scale(-1.0);
  }
  std::vector<double> y{0.3, -0.9, 0.5, 1.0};
  std::vector<double> minus_y;
  for (double v : y) minus_y.push_back(-v);
  CHECK(evaluate(S, minus_y) == evaluate(flipped, y));
}

TEST_CASE("threaded build is bit-identical") {
  auto a = AffineDiffusion::from_preset("one", PsiFamily{0.06, 3.0, 8, "sine"});
  auto weight = superposed_weight(regularity_constants(a, 1.0).b);
  TaylorBuildOptions serial, threaded;
  threaded.jobs = 3;
  auto S1 = build_taylor(a, one, 512, 0.5, weight, serial);
  auto S2 = build_taylor(a, one, 512, 0.5, weight, threaded);
  CHECK(S1.details == S2.details);
}
