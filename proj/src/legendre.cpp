#include "collective/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "collective/error.hpp"
#include "collective/nodal.hpp"
#include "parallel.hpp"

namespace collective {

namespace {

/// (P_n(y), P_{n-1}(y)) without range checks.
std::pair<double, double> legendre_pair(std::uint32_t n, double y) {
  double p = 1.0, prev = 0.0;
  for (std::uint32_t k = 0; k < n; ++k) {
    const double next = ((2.0 * k + 1.0) * y * p - k * prev) / (k + 1.0);
    prev = p;
    p = next;
  }
  return {p, prev};
}

std::uint32_t max_exponent(const MultiIndex& s) {
  std::uint32_t m = 0;
  for (const auto& e : s.entries()) m = std::max(m, e.exp);
  return m;
}

double norm_factor(const MultiIndex& s) {
  double c = 1.0;
  for (const auto& e : s.entries()) c *= std::sqrt(2.0 * e.exp + 1.0);
  return c;
}

std::map<MultiIndex, SpatialField> rescale(const std::map<MultiIndex, SpatialField>& in, bool multiply) {
  std::map<MultiIndex, SpatialField> out;
  for (const auto& [s, v] : in) {
    SpatialField w = v;
    const double c = norm_factor(s);
    w.scale(multiply ? c : 1.0 / c);
    out.emplace(s, std::move(w));
  }
  return out;
}

}  // namespace

double legendre_eval(std::uint32_t n, double y, LegendreNorm norm) {
  if (!(std::abs(y) <= 1.0)) throw Error(ErrorCode::DomainViolation, "|y| = " + std::to_string(std::abs(y)) + " exceeds 1");
  if (n > kMaxLegendreDegree) {
    throw Error(ErrorCode::InvalidArgument, "degree " + std::to_string(n) + " exceeds " + std::to_string(kMaxLegendreDegree));
  }
  const double p = legendre_pair(n, y).first;
  return norm == LegendreNorm::Sup ? p : std::sqrt(2.0 * n + 1.0) * p;
}

double legendre_eval(const MultiIndex& s, std::span<const double> y, LegendreNorm norm) {
  if (y.size() < s.max_dim()) throw Error(ErrorCode::InvalidArgument, "parameter is shorter than the multi-index");
  double v = 1.0;
  for (const auto& e : s.entries()) v *= legendre_eval(e.exp, y[e.dim - 1], norm);
  return v;
}

double coupling_factor(std::uint32_t n) {
  return (n + 1.0) / std::sqrt((2.0 * n + 1.0) * (2.0 * n + 3.0));
}

GaussRule gauss_legendre(std::size_t m) {
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "Gauss rule needs at least one point");
  const auto n = static_cast<std::uint32_t>(m);
  GaussRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (std::size_t i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(m) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      auto [p, prev] = legendre_pair(n, x);
      dp = n * (x * p - prev) / (x * x - 1.0);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-16) break;
    }
    auto [p, prev] = legendre_pair(n, x);
    dp = n * (x * p - prev) / (x * x - 1.0);
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);  // half the dy weight
    rule.nodes[m - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[i] = rule.weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  return rule;
}

std::map<MultiIndex, SpatialField> legendre_coeffs(const Evaluator& sampler, const std::set<MultiIndex>& lambda,
                                                   std::uint32_t J, std::uint32_t quad_order,
                                                   std::size_t max_points, unsigned jobs) {
  std::map<MultiIndex, SpatialField> out;
  if (lambda.empty()) return out;
  std::uint32_t deg = 0;
  for (const auto& s : lambda) {
    if (s.max_dim() > J) throw Error(ErrorCode::InvalidArgument, "index " + s.to_string() + " uses a dimension beyond J");
    deg = std::max(deg, max_exponent(s));
  }
  if (deg > kMaxLegendreDegree) throw Error(ErrorCode::InvalidArgument, "degree exceeds " + std::to_string(kMaxLegendreDegree));
  if (quad_order < deg + 2) {
    throw Error(ErrorCode::InvalidArgument,
                "quadrature order " + std::to_string(quad_order) + " is below max s_j + 2 = " + std::to_string(deg + 2));
  }
  if (J > kMaxQuadDims) {
    throw Error(ErrorCode::QuadBudgetExceeded,
                std::to_string(J) + " quadrature dimensions exceed " + std::to_string(kMaxQuadDims));
  }
  std::size_t points = 1;
  for (std::uint32_t j = 0; j < J; ++j) {
    points *= quad_order;
    if (points > max_points) {
      throw Error(ErrorCode::QuadBudgetExceeded, std::to_string(quad_order) + "^" + std::to_string(J) +
                                                     " nodes exceed " + std::to_string(max_points));
    }
  }
  const GaussRule rule = gauss_legendre(quad_order);
  // L_n at every node, n <= deg.
  std::vector<std::vector<double>> Lq(quad_order, std::vector<double>(deg + 1));
  for (std::uint32_t q = 0; q < quad_order; ++q) {
    for (std::uint32_t n = 0; n <= deg; ++n) Lq[q][n] = legendre_eval(n, rule.nodes[q]);
  }
  const std::vector<MultiIndex> keys(lambda.begin(), lambda.end());

  // Fixed chunking keeps the summation order independent of the worker count.
  const std::size_t chunks = std::min<std::size_t>(points, 64);
  std::vector<std::vector<SpatialField>> partial(chunks);
  internal::parallel_for(chunks, jobs, [&](std::size_t c) {
    const std::size_t lo = points * c / chunks, hi = points * (c + 1) / chunks;
    std::vector<std::uint32_t> qi(J);
    std::vector<double> y(J);
    auto& acc = partial[c];
    for (std::size_t id = lo; id < hi; ++id) {
      std::size_t rest = id;
      double w = 1.0;
      for (std::uint32_t j = 0; j < J; ++j) {
        qi[j] = static_cast<std::uint32_t>(rest % quad_order);
        rest /= quad_order;
        y[j] = rule.nodes[qi[j]];
        w *= rule.weights[qi[j]];
      }
      const SpatialField u = sampler(y);
      if (acc.empty()) acc.assign(keys.size(), SpatialField::zero(u.level));
      for (std::size_t i = 0; i < keys.size(); ++i) {
        if (u.level != acc[i].level) throw Error(ErrorCode::InvalidArgument, "samples live on different levels");
        double L = 1.0;
        for (const auto& e : keys[i].entries()) L *= Lq[qi[e.dim - 1]][e.exp];
        acc[i].axpy(w * L, u);
      }
    }
  });
  std::vector<SpatialField> total = partial[0];
  for (std::size_t c = 1; c < chunks; ++c) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (partial[c][i].level != total[i].level) throw Error(ErrorCode::InvalidArgument, "samples live on different levels");
      total[i].axpy(1.0, partial[c][i]);
    }
  }
  for (std::size_t i = 0; i < keys.size(); ++i) out.emplace(keys[i], std::move(total[i]));
  return out;
}

std::map<MultiIndex, SpatialField> to_sup_normalized(const std::map<MultiIndex, SpatialField>& v) {
  return rescale(v, true);
}

std::map<MultiIndex, SpatialField> to_orthonormal(const std::map<MultiIndex, SpatialField>& u) {
  return rescale(u, false);
}

std::uint64_t LegendreSurrogate::rank() const {
  std::uint64_t r = 0;
  for (const auto& [key, field] : details) r += std::uint64_t{1} << key.first;
  return r;
}

std::uint32_t LegendreSurrogate::max_level() const {
  std::uint32_t m = 0;
  for (const auto& [key, field] : details) m = std::max(m, key.first);
  return m;
}

std::map<MultiIndex, SpatialField> LegendreSurrogate::coefficients() const {
  std::map<MultiIndex, SpatialField> out;
  for (const auto& [s, k] : G.levels()) {
    SpatialField v = SpatialField::zero(k);
    for (std::uint32_t l = 1; l <= k; ++l) {
      auto it = details.find(LevelIndex{l, s});
      if (it != details.end()) v.axpy(1.0, prolong(it->second, k));
    }
    out.emplace(s, std::move(v));
  }
  return out;
}

SpatialField evaluate(const LegendreSurrogate& S, std::span<const double> y) {
  std::uint32_t dims = 0;
  for (const auto& [key, field] : S.details) dims = std::max(dims, key.second.max_dim());
  check_parameter(y, dims);
  SpatialField out = SpatialField::zero(S.max_level());
  std::map<MultiIndex, double> L;
  for (const auto& [key, field] : S.details) {
    if (key.first == 0) continue;
    auto it = L.find(key.second);
    if (it == L.end()) it = L.emplace(key.second, legendre_eval(key.second, y, S.norm)).first;
    if (it->second != 0.0) out.axpy(it->second, prolong(field, out.level));
  }
  return out;
}

namespace {

LegendreSurrogate from_coefficients(const CollectiveIndexSet& G, const std::map<MultiIndex, SpatialField>& v) {
  LegendreSurrogate S;
  S.G = G;
  for (const auto& [s, k] : G.levels()) {
    const SpatialField vk = project(v.at(s), k);
    for (std::uint32_t l = 0; l <= k; ++l) S.details.emplace(LevelIndex{l, s}, detail(vk, l));
  }
  return S;
}

void check_gate(const WeightRule& weight, double p) {
  if (weight.kind() == WeightKind::SuperposedFactorial) {
    auto gate = summability_gate(weight.b(), p);
    if (!gate.admissible) throw Error(ErrorCode::InvalidArgument, "summability gate failed: " + gate.reason);
  }
}

}  // namespace

LegendreSurrogate build_SL_on(const AffineDiffusion& a, const FunctionPtr& f, const CollectiveIndexSet& G,
                              const LegendreBuildOptions& options) {
  if (G.empty()) {
    LegendreSurrogate S;
    S.G = G;
    return S;
  }
  const std::uint32_t K = *G.max_level();
  std::set<MultiIndex> lambda;
  std::uint32_t deg = 0;
  for (const auto& [s, k] : G.levels()) {
    lambda.insert(s);
    deg = std::max(deg, max_exponent(s));
  }
  NodalSolver nodal(a, f, std::max(K, kReferenceLevel));
  auto v = legendre_coeffs([&](std::span<const double> y) { return nodal(y, K); }, lambda, a.J(),
                           deg + 2 + options.quad_extra, options.max_quad_points, options.jobs);
  return from_coefficients(G, v);
}

LegendreSurrogate build_SL(const AffineDiffusion& a, const FunctionPtr& f, std::int64_t n, double p,
                           const WeightRule& weight, const LegendreBuildOptions& options) {
  check_gate(weight, p);
  const double mass = lp_mass(weight, p, options.mass).mass;
  auto G = build_G(weight, p, choose_T(n, p, mass), options.enumeration);
  LegendreSurrogate S = build_SL_on(a, f, G, options);
  S.mass = mass;
  S.budget = n;
  return S;
}

GalerkinSystem::GalerkinSystem(const AffineDiffusion& a, const FunctionPtr& f,
                               const std::map<MultiIndex, std::uint32_t>& levels, unsigned jobs)
    : a_(&a), f_(f), jobs_(jobs) {
  std::map<MultiIndex, std::size_t> where;
  for (const auto& [s, k] : levels) {
    if (s.max_dim() > a.J()) throw Error(ErrorCode::InvalidArgument, "index " + s.to_string() + " uses a dimension beyond J");
    check_level(k);
    where.emplace(s, index_.size());
    index_.push_back(s);
    level_.push_back(k);
  }
  links_.resize(index_.size());
  for (std::size_t i = 0; i < index_.size(); ++i) {
    const MultiIndex& s = index_[i];
    for (std::uint32_t j = 1; j <= a.J(); ++j) {
      if (auto it = where.find(s.incremented(j)); it != where.end()) {
        links_[i].push_back({it->second, j, coupling_factor(s[j])});
      }
      if (s[j] > 0) {
        if (auto it = where.find(s.decremented(j)); it != where.end()) {
          links_[i].push_back({it->second, j, coupling_factor(s[j] - 1)});
        }
      }
    }
  }
}

std::size_t GalerkinSystem::size() const noexcept {
  std::size_t n = 0;
  for (auto k : level_) n += interior_nodes(k);
  return n;
}

GalerkinSystem::Blocks GalerkinSystem::zeros() const {
  Blocks out(index_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].assign(interior_nodes(level_[i]), 0.0);
  return out;
}

GalerkinSystem::Blocks GalerkinSystem::rhs() const {
  Blocks out = zeros();
  for (std::size_t i = 0; i < index_.size(); ++i) {
    if (index_[i].is_zero() && level_[i] > 0) out[i] = assemble_rhs(FluxFunctional{f_, {}}, level_[i]);
  }
  return out;
}

GalerkinSystem::Blocks GalerkinSystem::apply(const Blocks& w) const {
  Blocks out = zeros();
  internal::parallel_for(index_.size(), jobs_, [&](std::size_t i) {
    const std::uint32_t ki = level_[i];
    if (ki == 0) return;
    out[i] = stiffness_apply(a_->abar().element_integrals(ki), SpatialField(ki, w[i]));
    for (const Link& l : links_[i]) {
      const std::uint32_t kt = level_[l.other];
      if (kt == 0) continue;
      const std::uint32_t m = std::max(ki, kt);
      auto load = stiffness_apply(a_->psi(l.dim).element_integrals(m), prolong(SpatialField(kt, w[l.other]), m));
      if (m > ki) load = restrict_dual(load, m, ki);
      for (std::size_t n = 0; n < load.size(); ++n) out[i][n] += l.factor * load[n];
    }
  });
  return out;
}

GalerkinSystem::Blocks GalerkinSystem::precondition(const Blocks& r) const {
  Blocks out = zeros();
  internal::parallel_for(index_.size(), jobs_, [&](std::size_t i) {
    if (level_[i] == 0) return;
    out[i] = solve_elements(a_->abar().element_integrals(level_[i]), r[i], level_[i]).values;
  });
  return out;
}

double dot(const GalerkinSystem::Blocks& x, const GalerkinSystem::Blocks& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t n = 0; n < x[i].size(); ++n) s += x[i][n] * y[i][n];
  }
  return s;
}

LegendreSurrogate stochastic_galerkin_solve(const AffineDiffusion& a, const FunctionPtr& f,
                                            const CollectiveIndexSet& G, const LegendreBuildOptions& options) {
  if (G.empty()) {
    LegendreSurrogate S;
    S.G = G;
    return S;
  }
  if (!(ellipticity_bounds(a).r > 0.0)) throw Error(ErrorCode::EllipticityViolation, "r <= 0, the system is not coercive");
  GalerkinSystem sys(a, f, G.levels(), options.jobs);
  using Blocks = GalerkinSystem::Blocks;
  auto axpy = [](Blocks& y, double alpha, const Blocks& x) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      for (std::size_t n = 0; n < y[i].size(); ++n) y[i][n] += alpha * x[i][n];
    }
  };
  const Blocks b = sys.rhs();
  Blocks x = sys.zeros();
  Blocks r = b;
  const double bnorm = std::sqrt(dot(b, b));
  std::size_t it = 0;
  double rel = 0.0;
  if (bnorm > 0.0) {
    Blocks z = sys.precondition(r);
    Blocks p = z;
    double rz = dot(r, z);
    rel = 1.0;
    while (true) {
      rel = std::sqrt(dot(r, r)) / bnorm;
      if (rel <= options.cg_tolerance) break;
      if (it == options.cg_max_iterations) {
        throw Error(ErrorCode::IterationLimit, "CG stopped at relative residual " + std::to_string(rel) + " after " +
                                                   std::to_string(it) + " iterations");
      }
      const Blocks q = sys.apply(p);
      const double pq = dot(p, q);
      if (!(pq > 0.0)) throw Error(ErrorCode::SingularSystem, "CG met a non-positive curvature direction");
      const double alpha = rz / pq;
      axpy(x, alpha, p);
      axpy(r, -alpha, q);
      z = sys.precondition(r);
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t n = 0; n < p[i].size(); ++n) p[i][n] = z[i][n] + beta * p[i][n];
      }
      ++it;
    }
  }
  std::map<MultiIndex, SpatialField> v;
  for (std::size_t i = 0; i < sys.blocks(); ++i) v.emplace(sys.index(i), SpatialField(sys.level(i), std::move(x[i])));
  LegendreSurrogate S = from_coefficients(G, v);
  S.cg_iterations = it;
  S.cg_residual = rel;
  return S;
}

LegendreSurrogate build_galerkin(const AffineDiffusion& a, const FunctionPtr& f, std::int64_t n, double p,
                                 const WeightRule& weight, const LegendreBuildOptions& options) {
  check_gate(weight, p);
  const double mass = lp_mass(weight, p, options.mass).mass;
  auto G = build_G(weight, p, choose_T(n, p, mass), options.enumeration);
  LegendreSurrogate S = stochastic_galerkin_solve(a, f, G, options);
  S.mass = mass;
  S.budget = n;
  return S;
}

ParsevalResult parseval_check(const std::map<MultiIndex, SpatialField>& v, std::uint64_t seed, std::size_t draws) {
  ParsevalResult out;
  std::vector<MultiIndex> keys;
  std::vector<SpatialField> fields;
  std::uint32_t L = 0, J = 0;
  for (const auto& [s, f] : v) L = std::max(L, f.level);
  for (const auto& [s, f] : v) {
    keys.push_back(s);
    fields.push_back(prolong(f, L));
    J = std::max(J, s.max_dim());
  }
  if (L == 0 || draws < 2) return out;
  const std::vector<double> unit(std::size_t{1} << L, std::ldexp(1.0, -static_cast<int>(L)));
  const std::size_t m = keys.size();
  std::vector<double> gram(m * m);
  double trace = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) gram[i * m + j] = gram[j * m + i] = energy_product(unit, fields[i], fields[j]);
    trace += gram[i * m + i];
  }
  if (!(trace > 0.0)) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> y(J), Ls(m);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t d = 0; d < draws; ++d) {
    for (double& t : y) t = unif(rng);
    for (std::size_t i = 0; i < m; ++i) Ls[i] = legendre_eval(keys[i], y);
    double q = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (Ls[i] == 0.0) continue;
      double row = 0.0;
      for (std::size_t j = 0; j < m; ++j) row += gram[i * m + j] * Ls[j];
      q += Ls[i] * row;
    }
    const double delta = q - mean;  // Welford
    mean += delta / static_cast<double>(d + 1);
    m2 += delta * (q - mean);
  }
  const double var = m2 / static_cast<double>(draws - 1);
  out.defect = std::abs(mean - trace) / trace;
  out.std_err = std::sqrt(var / static_cast<double>(draws)) / trace;
  return out;
}

}  // namespace collective
