#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>

#include "collective/diffusion.hpp"
#include "collective/fem1d.hpp"
#include "collective/index_set.hpp"
#include "collective/multiindex.hpp"

namespace collective {

/// Key of a stored detail: (level k, multi-index s).
using LevelIndex = std::pair<std::uint32_t, MultiIndex>;

/// t_s = (1/s!) d^s u(0) on a common working level for every s in Lambda.
std::map<MultiIndex, SpatialField> taylor_coeffs(const AffineDiffusion& a, const FunctionPtr& f,
                                                 const DownwardClosedSet& lambda, std::uint32_t k_work,
                                                 unsigned jobs = 1);

/// Same recursion with a working level per index. The key set must be
/// downward closed and levels must not increase along s -> s + e^j.
std::map<MultiIndex, SpatialField> taylor_coeffs(const AffineDiffusion& a, const FunctionPtr& f,
                                                 const std::map<MultiIndex, std::uint32_t>& levels,
                                                 unsigned jobs = 1);

/// sum_{(k,s) in G} delta_k(t_s) y^s.
struct TaylorSurrogate {
  CollectiveIndexSet G;
  std::map<LevelIndex, SpatialField> details;
  double mass = 0.0;  ///< ||sigma^{-1}||_p^p used for T
  std::int64_t budget = 0;

  /// sum over keys of 2^k.
  std::uint64_t rank() const;
  std::uint32_t max_level() const;
};

struct TaylorBuildOptions {
  EnumerationOptions enumeration;
  LpMassOptions mass;
  unsigned jobs = 1;
};

/// G = G(T_n) with T_n = choose_T(n, p, mass); details for every (k,s) in G.
TaylorSurrogate build_taylor(const AffineDiffusion& a, const FunctionPtr& f, std::int64_t n, double p,
                             const WeightRule& weight, const TaylorBuildOptions& options = {});

/// Builds on an explicit index set.
TaylorSurrogate build_taylor_on(const AffineDiffusion& a, const FunctionPtr& f, const CollectiveIndexSet& G,
                                unsigned jobs = 1);

/// Evaluates on the finest stored level, summing keys in (k,s) order.
SpatialField evaluate(const TaylorSurrogate& S, std::span<const double> y);

/// Throws DomainViolation unless every |y_j| <= 1, and InvalidArgument when y
/// has fewer entries than max_dim.
void check_parameter(std::span<const double> y, std::uint32_t max_dim);

/// y^s.
double monomial(const MultiIndex& s, std::span<const double> y);

}  // namespace collective
