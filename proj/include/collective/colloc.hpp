#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "collective/diffusion.hpp"
#include "collective/fem1d.hpp"
#include "collective/index_set.hpp"
#include "collective/multiindex.hpp"
#include "collective/taylor.hpp"

namespace collective {

/// Largest supported number of distinct interval points.
inline constexpr std::size_t kMaxLejaPoints = 129;
/// Angular resolution of the disk search.
inline constexpr std::size_t kLejaGrid = std::size_t{1} << 16;
/// Points per axis for Lebesgue-function sups in one dimension.
inline constexpr std::size_t kLebesgueGrid = 4097;

/// Real parts of the disk Leja sequence started at z_0 = 1, duplicates dropped.
/// The first n points; n <= kMaxLejaPoints, otherwise CountOverflow.
std::vector<double> leja_points(std::size_t n);

/// sup over a 4097-point grid of sum_j |l_j^k| for the nodes xi_0..xi_k.
double lebesgue_univariate(std::uint32_t k, std::span<const double> xi);

/// max_{1 <= k <= k_max} log(lambda_k) / log(k + 1), the smallest theta with lambda_k <= (k+1)^theta.
double lebesgue_exponent(std::uint32_t k_max, std::span<const double> xi);

/// Grid sup of the Lebesgue function of I_Lambda. The tensor grid per axis is
/// 4097 in one dimension and shrinks with |Lambda|^2 and the dimension otherwise.
double lebesgue_of_set(const DownwardClosedSet& lambda, std::span<const double> xi);

/// h_s(y) = prod_j prod_{i < s_j} (y_j - xi_i) / (xi_{s_j} - xi_i).
double hier_basis_eval(const MultiIndex& s, std::span<const double> y, std::span<const double> xi);

/// Grid point xi_s as a dense vector with J entries.
std::vector<double> grid_point(const MultiIndex& s, std::uint32_t J, std::span<const double> xi);

using FieldSampler = std::function<SpatialField(std::span<const double>)>;
using ScalarSampler = std::function<double(std::span<const double>)>;

/// Hierarchical surpluses along `ordering`, a listing of Lambda whose prefixes
/// are all downward closed. Surplus fields live on the finest level involved.
std::map<MultiIndex, SpatialField> surpluses(const FieldSampler& sampler, const DownwardClosedSet& lambda,
                                             std::span<const MultiIndex> ordering, std::span<const double> xi,
                                             std::uint32_t J);
std::map<MultiIndex, double> surpluses(const ScalarSampler& sampler, const DownwardClosedSet& lambda,
                                       std::span<const MultiIndex> ordering, std::span<const double> xi,
                                       std::uint32_t J);

/// I_Lambda v(y) = sum_s u_s h_s(y).
double interpolate(const std::map<MultiIndex, double>& surplus, std::span<const double> y,
                   std::span<const double> xi);

/// sum_k sum_{s in Lambda_k} delta_k(u_s) h_s(y).
struct CollocSurrogate {
  CollectiveIndexSet G;
  std::vector<std::set<MultiIndex>> sections;  ///< Lambda_0 ⊇ Lambda_1 ⊇ ...
  std::map<LevelIndex, SpatialField> details;
  std::vector<double> xi;
  double mass = 0.0;
  std::int64_t budget = 0;
  std::uint64_t cost = 0;       ///< sum_k 2^k |Lambda_k|
  double cost_bound = 0.0;      ///< 2 mass T
  std::size_t closure_added = 0;  ///< indices added to make the sections downward closed

  bool cost_audit() const { return static_cast<double>(cost) <= cost_bound; }
  std::uint64_t rank() const;
  std::uint32_t max_level() const;
};

/// How samples at xi_s are computed on level kappa(s).
/// Nodal: P_k u(xi_s), the interpolant of the exact solution. Galerkin: the level-k P1 solve.
enum class CollocSampler { Nodal, Galerkin };

struct CollocBuildOptions {
  EnumerationOptions enumeration;
  LpMassOptions mass;
  unsigned jobs = 1;
  CollocSampler sampler = CollocSampler::Nodal;
};

/// G = G(T_n) for the given weight. Non-lower sections are replaced by their lower closures.
CollocSurrogate build_colloc(const AffineDiffusion& a, const FunctionPtr& f, std::int64_t n, double p,
                             const WeightRule& weight, const CollocBuildOptions& options = {});

/// Builds on an explicit index set; mass and T only feed the cost audit.
CollocSurrogate build_colloc_on(const AffineDiffusion& a, const FunctionPtr& f, const CollectiveIndexSet& G,
                                double mass, unsigned jobs = 1,
                                CollocSampler sampler = CollocSampler::Nodal);

SpatialField evaluate(const CollocSurrogate& S, std::span<const double> y);

}  // namespace collective
