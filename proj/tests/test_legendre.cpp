#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "collective/error.hpp"
#include "collective/legendre.hpp"
#include "collective/verify.hpp"
#include "doctest.h"

using namespace collective;

namespace {

const FunctionPtr one = SpatialFunction::constant(1.0);

AffineDiffusion constant_model(std::vector<double> cs) {
  std::vector<FunctionPtr> psis;
  for (double c : cs) psis.push_back(SpatialFunction::constant(c));
  return AffineDiffusion(one, psis);
}

/// abar = 1, psi_1 = c sin(pi x).
AffineDiffusion one_parameter_model(double c = 0.5) {
  auto psi = std::make_shared<const SpatialFunction>(
      [c](double x) { return c * std::sin(std::numbers::pi * x); },
      [c](double x) { return c * std::numbers::pi * std::cos(std::numbers::pi * x); }, "c-sin");
  return AffineDiffusion(one, {psi});
}

CollectiveIndexSet degrees_up_to(std::uint32_t deg, std::uint32_t level) {
  std::map<MultiIndex, std::uint32_t> kappa;
  kappa.emplace(MultiIndex{}, level);
  for (std::uint32_t n = 1; n <= deg; ++n) kappa.emplace(MultiIndex({{1, n}}), level);
  return CollectiveIndexSet(1.0, 1.0, "custom", kappa);
}

SpatialField random_field(std::mt19937_64& rng, std::uint32_t k) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> v(interior_nodes(k));
  for (double& t : v) t = unif(rng);
  return SpatialField(k, std::move(v));
}

double rel_distance(const SpatialField& a, const SpatialField& b) { return v_distance(a, b) / v_norm(b); }

}  // namespace

TEST_CASE("legendre_eval") {
  CHECK(legendre_eval(0, 0.3, LegendreNorm::Sup) == 1.0);
  CHECK(legendre_eval(0, -0.7) == 1.0);
  CHECK(legendre_eval(1, 1.0, LegendreNorm::Sup) == 1.0);
  for (double y : {-1.0, -0.2, 0.5}) CHECK(legendre_eval(1, y) == doctest::Approx(std::sqrt(3.0) * y).epsilon(1e-15));
  CHECK(legendre_eval(2, 0.5, LegendreNorm::Sup) == doctest::Approx(-0.125).epsilon(1e-15));
  CHECK(legendre_eval(3, 0.5, LegendreNorm::Sup) == doctest::Approx(-0.4375).epsilon(1e-15));

  const double l2sq = boost::math::quadrature::gauss<double, 32>::integrate(
      [](double y) { return 0.5 * std::pow(legendre_eval(2, y), 2); }, -1.0, 1.0);
  CHECK(std::abs(l2sq - 1.0) <= 1e-14);

  for (std::uint32_t n = 0; n <= 20; ++n) {
    double sup = 0.0;
    for (int i = 0; i <= 4000; ++i) sup = std::max(sup, std::abs(legendre_eval(n, -1.0 + i / 2000.0, LegendreNorm::Sup)));
    CHECK(sup == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_THROWS_WITH_AS(legendre_eval(2, 1.01), doctest::Contains("DomainViolation"), Error);
  CHECK_THROWS_AS(legendre_eval(65, 0.0), Error);

  std::vector<double> y{0.2, -0.4, 0.9};
  MultiIndex s({{1, 2}, {3, 1}});
  CHECK(legendre_eval(s, y) == doctest::Approx(legendre_eval(2, 0.2) * legendre_eval(1, 0.9)).epsilon(1e-15));
}

TEST_CASE("Gauss-Legendre rule") {
  for (std::size_t m : {1u, 2u, 7u, 20u, 64u}) {
    auto r = gauss_legendre(m);
    double sum = 0.0;
    for (double w : r.weights) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::is_sorted(r.nodes.begin(), r.nodes.end()));
  }
  // Against boost's tabulated 20-point rule: positive abscissas, dy weights.
  auto r = gauss_legendre(20);
  const auto& xs = boost::math::quadrature::gauss<double, 20>::abscissa();
  const auto& ws = boost::math::quadrature::gauss<double, 20>::weights();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(std::abs(r.nodes[10 + i] - xs[i]) <= 1e-15);
    CHECK(std::abs(2 * r.weights[10 + i] - ws[i]) <= 1e-15);
  }
}

TEST_CASE("orthonormality") {
  auto r = gauss_legendre(24);
  double worst = 0.0;
  for (std::uint32_t m = 0; m <= 20; ++m) {
    for (std::uint32_t n = 0; n <= 20; ++n) {
      double g = 0.0;
      for (std::size_t q = 0; q < r.nodes.size(); ++q) g += r.weights[q] * legendre_eval(m, r.nodes[q]) * legendre_eval(n, r.nodes[q]);
      worst = std::max(worst, std::abs(g - (m == n ? 1.0 : 0.0)));
    }
  }
  CHECK(worst <= 1e-12);

  // Tensor Gram matrix of {L_s : |s| <= 4, three dims}.
  std::vector<MultiIndex> basis;
  for (std::uint32_t a = 0; a <= 4; ++a)
    for (std::uint32_t b = 0; a + b <= 4; ++b)
      for (std::uint32_t c = 0; a + b + c <= 4; ++c) {
        std::vector<std::uint32_t> e{a, b, c};
        basis.push_back(MultiIndex::from_dense(e));
      }
  auto g6 = gauss_legendre(6);
  std::vector<double> gram(basis.size() * basis.size(), 0.0);
  for (std::size_t i = 0; i < 216; ++i) {
    std::vector<double> y{g6.nodes[i % 6], g6.nodes[(i / 6) % 6], g6.nodes[i / 36]};
    const double w = g6.weights[i % 6] * g6.weights[(i / 6) % 6] * g6.weights[i / 36];
    for (std::size_t p = 0; p < basis.size(); ++p)
      for (std::size_t q = 0; q < basis.size(); ++q)
        gram[p * basis.size() + q] += w * legendre_eval(basis[p], y) * legendre_eval(basis[q], y);
  }
  double defect = 0.0;
  for (std::size_t p = 0; p < basis.size(); ++p)
    for (std::size_t q = 0; q < basis.size(); ++q)
      defect = std::max(defect, std::abs(gram[p * basis.size() + q] - (p == q ? 1.0 : 0.0)));
  CHECK(defect <= 1e-10);
}

TEST_CASE("coupling factors") {
  CHECK(coupling_factor(0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  auto r = gauss_legendre(16);
  for (std::uint32_t n = 0; n <= 10; ++n) {
    double g = 0.0;
    for (std::size_t q = 0; q < r.nodes.size(); ++q) {
      g += r.weights[q] * r.nodes[q] * legendre_eval(n, r.nodes[q]) * legendre_eval(n + 1, r.nodes[q]);
    }
    CHECK(std::abs(g - coupling_factor(n)) <= 1e-14);
  }
}

TEST_CASE("legendre_coeffs") {
  std::mt19937_64 rng(3);
  const SpatialField w = random_field(rng, 5);
  std::set<MultiIndex> lam{MultiIndex{}, MultiIndex({{1, 1}}), MultiIndex({{2, 1}}), MultiIndex({{1, 2}}),
                           MultiIndex({{1, 1}, {2, 1}})};
  SUBCASE("constant sampler") {
    auto v = legendre_coeffs([&](std::span<const double>) { return w; }, lam, 2, 5);
    CHECK(v_distance(v.at(MultiIndex{}), w) <= 1e-12);
    for (const auto& [s, f] : v) {
      if (!s.is_zero()) CHECK(v_norm(f) <= 1e-12);
    }
  }
  SUBCASE("affine sampler") {
    auto v = legendre_coeffs(
        [&](std::span<const double> y) {
          SpatialField u = w;
          u.scale(1.0 + 0.5 * y[0]);
          return u;
        },
        lam, 2, 4, kMaxQuadPoints, 3);
    SpatialField want = w;
    want.scale(0.5 / std::sqrt(3.0));
    CHECK(v_distance(v.at(MultiIndex({{1, 1}})), want) <= 1e-12);
    CHECK(v_norm(v.at(MultiIndex({{2, 1}}))) <= 1e-12);
  }
  SUBCASE("constant-coefficient model against a quadrature oracle") {
    const double c = 0.5;
    auto a = constant_model({c});
    auto u0 = reference_solution(a, one, {}, 8);
    std::set<MultiIndex> line;
    for (std::uint32_t n = 0; n <= 10; ++n) line.insert(n == 0 ? MultiIndex{} : MultiIndex({{1, n}}));
    auto v = legendre_coeffs([&](std::span<const double> y) { return reference_solution(a, one, y, 8); }, line, 1, 30);
    for (std::uint32_t n = 0; n <= 10; ++n) {
      const double coef = boost::math::quadrature::gauss<double, 64>::integrate(
          [&](double y) { return 0.5 * legendre_eval(n, y) / (1.0 + c * y); }, -1.0, 1.0);
      SpatialField want = u0;
      want.scale(coef);
      CHECK(v_distance(v.at(n == 0 ? MultiIndex{} : MultiIndex({{1, n}})), want) <= 1e-8);
    }
  }
  SUBCASE("errors") {
    auto s = [&](std::span<const double>) { return w; };
    CHECK_THROWS_WITH_AS(legendre_coeffs(s, lam, 2, 3), doctest::Contains("InvalidArgument"), Error);
    CHECK_THROWS_WITH_AS(legendre_coeffs(s, lam, 5, 4), doctest::Contains("QuadBudgetExceeded"), Error);
    CHECK_THROWS_WITH_AS(legendre_coeffs(s, lam, 3, 60, 1000), doctest::Contains("QuadBudgetExceeded"), Error);
    CHECK_THROWS_AS(legendre_coeffs(s, lam, 1, 4), Error);
  }
}

TEST_CASE("u_s and v_s round trip") {
  std::mt19937_64 rng(8);
  std::map<MultiIndex, SpatialField> v;
  v.emplace(MultiIndex{}, random_field(rng, 4));
  v.emplace(MultiIndex({{1, 3}}), random_field(rng, 4));
  v.emplace(MultiIndex({{1, 1}, {3, 2}}), random_field(rng, 3));
  auto u = to_sup_normalized(v);
  auto back = to_orthonormal(u);
  std::vector<double> y{0.3, -0.8, 0.45};
  SpatialField sum_v = SpatialField::zero(4), sum_u = SpatialField::zero(4);
  for (const auto& [s, f] : v) {
    CHECK(v_distance(back.at(s), f) <= 1e-15 * v_norm(f));
    sum_v.axpy(legendre_eval(s, y), prolong(f, 4));
    sum_u.axpy(legendre_eval(s, y, LegendreNorm::Sup), prolong(u.at(s), 4));
  }
  CHECK(v_distance(sum_u, sum_v) <= 1e-14 * v_norm(sum_v));
  CHECK(v_distance(u.at(MultiIndex({{1, 1}, {3, 2}})), [&] {
          SpatialField t = v.at(MultiIndex({{1, 1}, {3, 2}}));
          t.scale(std::sqrt(3.0) * std::sqrt(5.0));
          return t;
        }()) <= 1e-14);
}

TEST_CASE("build_SL") {
  auto a = one_parameter_model(0.1);
  auto rc = regularity_constants(a, 1.0);
  auto w = superposed_weight(rc.b);
  auto tiny = build_SL(a, one, 1, 0.5, w);
  CHECK(tiny.rank() <= 1);
  for (const auto& [key, field] : tiny.details) CHECK(key == LevelIndex{0, MultiIndex{}});
  CHECK(v_norm(evaluate(tiny, std::vector<double>{0.3})) == 0.0);
  for (std::int64_t n : {16, 64, 256}) {
    auto S = build_SL(a, one, n, 0.5, w);
    CHECK(S.rank() <= static_cast<std::uint64_t>(n));
    CHECK(!S.details.empty());
  }
  auto big = AffineDiffusion::from_preset("one", PsiFamily{0.06, 3.0, 8, "sine"});
  CHECK_THROWS_WITH_AS(build_SL(big, one, 256, 0.5, superposed_weight(regularity_constants(big, 1.0).b)),
                       doctest::Contains("QuadBudgetExceeded"), Error);
}

TEST_CASE("Galerkin system with a single parametric block is the nonparametric solve") {
  auto bump = AffineDiffusion::abar_preset("one-plus-bump");
  std::map<MultiIndex, std::uint32_t> kappa{{MultiIndex{}, 7}};
  CollectiveIndexSet G(1.0, 1.0, "custom", kappa);
  auto want = solve(*bump, FluxFunctional{one, {}}, 7);
  auto none = stochastic_galerkin_solve(AffineDiffusion(bump, {}), one, G);
  CHECK(rel_distance(none.coefficients().at(MultiIndex{}), want) <= 1e-10);
  auto with_psi = stochastic_galerkin_solve(AffineDiffusion::from_preset("one-plus-bump", PsiFamily{0.1, 2.0, 3, "sine"}), one, G);
  CHECK(rel_distance(with_psi.coefficients().at(MultiIndex{}), want) <= 1e-10);
}

TEST_CASE("Galerkin system is symmetric and the solution satisfies the equations") {
  auto a = AffineDiffusion::from_preset("one-plus-bump", PsiFamily{0.1, 2.0, 3, "sine"});
  std::map<MultiIndex, std::uint32_t> kappa{{MultiIndex{}, 7},
                                            {MultiIndex({{1, 1}}), 5},
                                            {MultiIndex({{2, 1}}), 4},
                                            {MultiIndex({{1, 2}}), 3},
                                            {MultiIndex({{1, 1}, {2, 1}}), 2},
                                            {MultiIndex({{3, 1}}), 6}};
  CollectiveIndexSet G(1.0, 1.0, "custom", kappa);
  GalerkinSystem sys(a, one, kappa, 2);
  std::mt19937_64 rng(4);
  auto random_blocks = [&] {
    auto b = sys.zeros();
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = random_field(rng, sys.level(i)).values;
    return b;
  };
  for (int t = 0; t < 5; ++t) {
    auto x = random_blocks(), z = random_blocks();
    const double lhs = dot(sys.apply(x), z), rhs = dot(x, sys.apply(z));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
    CHECK(dot(sys.apply(x), x) > 0.0);
  }
  auto S = stochastic_galerkin_solve(a, one, G);
  CHECK(S.cg_residual <= 1e-10);
  auto coeffs = S.coefficients();
  auto x = sys.zeros();
  for (std::size_t i = 0; i < sys.blocks(); ++i) x[i] = coeffs.at(sys.index(i)).values;
  auto r = sys.apply(x);
  auto b = sys.rhs();
  for (int t = 0; t < 20; ++t) {
    auto w = random_blocks();
    CHECK(std::abs(dot(r, w) - dot(b, w)) <= 1e-8);
  }
  LegendreBuildOptions strict;
  strict.cg_max_iterations = 1;
  CHECK_THROWS_WITH_AS(stochastic_galerkin_solve(a, one, G, strict), doctest::Contains("IterationLimit"), Error);
}

TEST_CASE("Cea chain on the one-parameter fixture") {
  auto a = one_parameter_model();
  auto G = degrees_up_to(8, 7);
  auto uG = stochastic_galerkin_solve(a, one, G);
  auto SL = build_SL_on(a, one, G);
  auto el = ellipticity_bounds(a);
  const double cea = std::sqrt(el.R / el.r);

  auto mc = mc_samples(a, one, 2000, 17, 1);
  auto eg = error_l2mu(mc, [&](std::span<const double> y) { return evaluate(uG, y); });
  auto es = error_l2mu(mc, [&](std::span<const double> y) { return evaluate(SL, y); });
  CHECK(eg.value <= cea * es.value + 3 * (eg.std_err + es.std_err));

  // Same inequality with 64-point Gauss quadrature in y.
  auto gauss_err = [&](const LegendreSurrogate& S) {
    return std::sqrt(boost::math::quadrature::gauss<double, 64>::integrate(
        [&](double y) {
          std::vector<double> yy{y};
          const double d = v_distance(reference_solution(a, one, yy), evaluate(S, yy));
          return 0.5 * d * d;
        },
        -1.0, 1.0));
  };
  const double qg = gauss_err(uG), qs = gauss_err(SL);
  CHECK(qg <= cea * qs);
  CHECK(std::abs(qg - eg.value) <= 3 * eg.std_err + 1e-6);
}

TEST_CASE("coefficient norms respect K d^n on the one-parameter fixture") {
  auto a = one_parameter_model();
  auto rc = regularity_constants(a, 1.0);
  auto v = build_SL_on(a, one, degrees_up_to(8, 10)).coefficients();
  for (std::uint32_t n = 0; n <= 8; ++n) {
    const double norm = v_norm(v.at(n == 0 ? MultiIndex{} : MultiIndex({{1, n}})));
    CHECK(norm <= rc.K * std::pow(rc.d[0], n));
  }
}

TEST_CASE("Galerkin budgets") {
  auto a = AffineDiffusion::from_preset("one", PsiFamily{0.06, 3.0, 8, "sine"});
  auto w = superposed_weight(regularity_constants(a, 1.0).d);
  std::uint64_t prev = 0;
  for (std::int64_t n : {16, 64, 256, 1024}) {
    auto S = build_galerkin(a, one, n, 2.0 / 3.0, w);
    CHECK(S.rank() <= static_cast<std::uint64_t>(n));
    CHECK(S.rank() >= prev);
    CHECK(S.cg_residual <= 1e-10);
    prev = S.rank();
  }
}

TEST_CASE("Parseval") {
  std::mt19937_64 rng(12);
  std::map<MultiIndex, SpatialField> v;
  v.emplace(MultiIndex{}, random_field(rng, 6));
  SUBCASE("single constant term is exact") { CHECK(parseval_check(v, 1).defect <= 1e-12); }
  SUBCASE("two orthogonal terms") {
    v.emplace(MultiIndex({{2, 1}}), random_field(rng, 5));
    auto r = parseval_check(v, 2);
    CHECK(r.std_err > 0.0);
    CHECK(r.defect <= 3 * r.std_err);
  }
  SUBCASE("fixture expansion up to degree 6") {
    auto a = one_parameter_model();
    auto c = build_SL_on(a, one, degrees_up_to(6, 8)).coefficients();
    CHECK(parseval_check(c, 20240611).defect <= 2e-2);
  }
}
