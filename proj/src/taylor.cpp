#include "collective/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "collective/error.hpp"
#include "parallel.hpp"

namespace collective {

std::map<MultiIndex, SpatialField> taylor_coeffs(const AffineDiffusion& a, const FunctionPtr& f,
                                                 const DownwardClosedSet& lambda, std::uint32_t k_work,
                                                 unsigned jobs) {
  check_level(k_work);
  std::map<MultiIndex, std::uint32_t> levels;
  for (const auto& s : lambda) levels.emplace(s, k_work);
  return taylor_coeffs(a, f, levels, jobs);
}

std::map<MultiIndex, SpatialField> taylor_coeffs(const AffineDiffusion& a, const FunctionPtr& f,
                                                 const std::map<MultiIndex, std::uint32_t>& levels, unsigned jobs) {
  std::vector<std::vector<MultiIndex>> layers;
  for (const auto& [s, k] : levels) {
    check_level(k);
    if (s.max_dim() > a.J()) {
      throw Error(ErrorCode::InvalidArgument, "index " + s.to_string() + " uses a dimension beyond J");
    }
    for (const auto& e : s.entries()) {
      auto pred = levels.find(s.decremented(e.dim));
      if (pred == levels.end()) {
        throw Error(ErrorCode::NotLowerSet, "t_" + s.to_string() + " needs t_" + s.decremented(e.dim).to_string());
      }
      if (pred->second < k) {
        throw Error(ErrorCode::InvalidArgument, "working level of " + s.to_string() + " exceeds its predecessor's");
      }
    }
    if (layers.size() <= s.order()) layers.resize(s.order() + 1);
    layers[s.order()].push_back(s);
  }

  std::map<MultiIndex, SpatialField> t;
  for (const auto& layer : layers) {
    std::vector<SpatialField> out(layer.size());
    internal::parallel_for(layer.size(), jobs, [&](std::size_t i) {
      const MultiIndex& s = layer[i];
      FluxFunctional rhs;
      if (s.is_zero()) {
        rhs.f = f;
      } else {
        for (const auto& e : s.entries()) rhs.flux_terms.push_back({1.0, a.psi_ptr(e.dim), &t.at(s.decremented(e.dim))});
      }
      out[i] = solve(a.abar(), rhs, levels.at(s));
    });
    for (std::size_t i = 0; i < layer.size(); ++i) t.emplace(layer[i], std::move(out[i]));
  }
  return t;
}

std::uint64_t TaylorSurrogate::rank() const {
  std::uint64_t r = 0;
  for (const auto& [key, field] : details) r += std::uint64_t{1} << key.first;
  return r;
}

std::uint32_t TaylorSurrogate::max_level() const {
  std::uint32_t m = 0;
  for (const auto& [key, field] : details) m = std::max(m, key.first);
  return m;
}

TaylorSurrogate build_taylor_on(const AffineDiffusion& a, const FunctionPtr& f, const CollectiveIndexSet& G,
                                unsigned jobs) {
  TaylorSurrogate S;
  S.G = G;
  if (G.empty()) return S;
  auto t = taylor_coeffs(a, f, closure_levels(G), jobs);
  for (const auto& [k, s] : G.pairs()) S.details.emplace(LevelIndex{k, s}, detail(t.at(s), k));
  return S;
}

TaylorSurrogate build_taylor(const AffineDiffusion& a, const FunctionPtr& f, std::int64_t n, double p,
                             const WeightRule& weight, const TaylorBuildOptions& options) {
  if (weight.kind() == WeightKind::SuperposedFactorial) {
    auto gate = summability_gate(weight.b(), p);
    if (!gate.admissible) throw Error(ErrorCode::InvalidArgument, "summability gate failed: " + gate.reason);
  }
  const double mass = lp_mass(weight, p, options.mass).mass;
  auto G = build_G(weight, p, choose_T(n, p, mass), options.enumeration);
  TaylorSurrogate S = build_taylor_on(a, f, G, options.jobs);
  S.mass = mass;
  S.budget = n;
  return S;
}

void check_parameter(std::span<const double> y, std::uint32_t max_dim) {
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (!(std::abs(y[j]) <= 1.0)) {
      throw Error(ErrorCode::DomainViolation, "|y_" + std::to_string(j + 1) + "| = " + std::to_string(std::abs(y[j])) +
                                                  " exceeds 1");
    }
  }
  if (y.size() < max_dim) {
    throw Error(ErrorCode::InvalidArgument,
                "parameter has " + std::to_string(y.size()) + " entries, need " + std::to_string(max_dim));
  }
}

double monomial(const MultiIndex& s, std::span<const double> y) {
  double m = 1.0;
  for (const auto& e : s.entries()) {
    for (std::uint32_t i = 0; i < e.exp; ++i) m *= y[e.dim - 1];
  }
  return m;
}

SpatialField evaluate(const TaylorSurrogate& S, std::span<const double> y) {
  std::uint32_t dims = 0;
  for (const auto& [key, field] : S.details) dims = std::max(dims, key.second.max_dim());
  check_parameter(y, dims);
  SpatialField out = SpatialField::zero(S.max_level());
  for (const auto& [key, field] : S.details) {
    const double w = monomial(key.second, y);
    if (w == 0.0) continue;
    out.axpy(w, prolong(field, out.level));
  }
  return out;
}

}  // namespace collective
