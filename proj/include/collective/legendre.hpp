#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "collective/diffusion.hpp"
#include "collective/fem1d.hpp"
#include "collective/index_set.hpp"
#include "collective/multiindex.hpp"
#include "collective/taylor.hpp"
#include "collective/verify.hpp"

namespace collective {

/// Sup: P_n with P_n(1) = 1. Orthonormal: L_n = sqrt(2n+1) P_n, orthonormal for dmu_1 = dy/2.
enum class LegendreNorm { Sup, Orthonormal };

inline constexpr std::uint32_t kMaxLegendreDegree = 64;
/// Tensor quadrature runs on at most this many active dimensions.
inline constexpr std::uint32_t kMaxQuadDims = 4;
inline constexpr std::size_t kMaxQuadPoints = 200000;

/// Three-term recurrence. n <= 64, |y| <= 1.
double legendre_eval(std::uint32_t n, double y, LegendreNorm norm = LegendreNorm::Orthonormal);
/// prod_j of the univariate polynomials; y needs at least s.max_dim() entries.
double legendre_eval(const MultiIndex& s, std::span<const double> y, LegendreNorm norm = LegendreNorm::Orthonormal);

/// <y L_n, L_{n+1}>_{mu_1} = (n+1)/sqrt((2n+1)(2n+3)).
double coupling_factor(std::uint32_t n);

/// m-point Gauss-Legendre rule on [-1,1] with weights summing to 1.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(std::size_t m);

/// v_s = int u(y) L_s(y) dmu(y) for s in lambda by tensor Gauss quadrature with
/// quad_order points in each of the J sampler coordinates. Every sample must be on the same level.
/// QuadBudgetExceeded for J > 4 or more than max_points nodes.
std::map<MultiIndex, SpatialField> legendre_coeffs(const Evaluator& sampler, const std::set<MultiIndex>& lambda,
                                                   std::uint32_t J, std::uint32_t quad_order,
                                                   std::size_t max_points = kMaxQuadPoints, unsigned jobs = 1);

/// u_s = prod_j sqrt(2 s_j + 1) v_s and back.
std::map<MultiIndex, SpatialField> to_sup_normalized(const std::map<MultiIndex, SpatialField>& v);
std::map<MultiIndex, SpatialField> to_orthonormal(const std::map<MultiIndex, SpatialField>& u);

/// sum_{(k,s) in G} delta_k(v_s) L_s(y).
struct LegendreSurrogate {
  CollectiveIndexSet G;
  std::map<LevelIndex, SpatialField> details;
  LegendreNorm norm = LegendreNorm::Orthonormal;
  double mass = 0.0;
  std::int64_t budget = 0;
  std::size_t cg_iterations = 0;  ///< Galerkin route only
  double cg_residual = 0.0;       ///< final relative residual, Galerkin route only

  std::uint64_t rank() const;
  std::uint32_t max_level() const;
  /// v_s on level kappa(s), the sum of its details.
  std::map<MultiIndex, SpatialField> coefficients() const;
};

SpatialField evaluate(const LegendreSurrogate& S, std::span<const double> y);

struct LegendreBuildOptions {
  EnumerationOptions enumeration;
  LpMassOptions mass;
  unsigned jobs = 1;
  std::uint32_t quad_extra = 8;  ///< points per axis beyond max s_j + 2
  std::size_t max_quad_points = kMaxQuadPoints;
  double cg_tolerance = 1e-10;
  std::size_t cg_max_iterations = 5000;
};

/// Projection surrogate: G = G(T_n), v_s by quadrature of nodal samples P_K u(y).
LegendreSurrogate build_SL(const AffineDiffusion& a, const FunctionPtr& f, std::int64_t n, double p,
                           const WeightRule& weight, const LegendreBuildOptions& options = {});
LegendreSurrogate build_SL_on(const AffineDiffusion& a, const FunctionPtr& f, const CollectiveIndexSet& G,
                              const LegendreBuildOptions& options = {});

/// The coupled system B(u_G, v) = F(v) on V^L(G) = sum_s V_{kappa(s)} (x) L_s.
/// Block i holds the nodal values of w_{s_i} on level kappa(s_i).
class GalerkinSystem {
 public:
  using Blocks = std::vector<std::vector<double>>;

  GalerkinSystem(const AffineDiffusion& a, const FunctionPtr& f, const std::map<MultiIndex, std::uint32_t>& levels,
                 unsigned jobs = 1);

  std::size_t blocks() const noexcept { return index_.size(); }
  const MultiIndex& index(std::size_t i) const { return index_.at(i); }
  std::uint32_t level(std::size_t i) const { return level_.at(i); }
  /// Total number of unknowns.
  std::size_t size() const noexcept;

  Blocks zeros() const;
  Blocks rhs() const;
  Blocks apply(const Blocks& w) const;
  /// Block-Jacobi: inverse of the abar stiffness on each block.
  Blocks precondition(const Blocks& r) const;

 private:
  struct Link {
    std::size_t other;
    std::uint32_t dim;
    double factor;
  };
  const AffineDiffusion* a_;
  FunctionPtr f_;
  unsigned jobs_;
  std::vector<MultiIndex> index_;
  std::vector<std::uint32_t> level_;
  std::vector<std::vector<Link>> links_;
};

double dot(const GalerkinSystem::Blocks& x, const GalerkinSystem::Blocks& y);

/// Preconditioned CG to relative residual tol. IterationLimit, SingularSystem.
LegendreSurrogate stochastic_galerkin_solve(const AffineDiffusion& a, const FunctionPtr& f,
                                            const CollectiveIndexSet& G, const LegendreBuildOptions& options = {});

/// G = G(T_n) from the weight, then the Galerkin solve.
LegendreSurrogate build_galerkin(const AffineDiffusion& a, const FunctionPtr& f, std::int64_t n, double p,
                                 const WeightRule& weight, const LegendreBuildOptions& options = {});

struct ParsevalResult {
  double defect = 0.0;   ///< |MC ||u||^2 - sum ||v_s||^2| / sum ||v_s||^2
  double std_err = 0.0;  ///< standard error of the MC estimate, same scaling
};

/// Monte-Carlo check of ||sum v_s L_s||^2_{L2(mu,V)} = sum ||v_s||_V^2.
ParsevalResult parseval_check(const std::map<MultiIndex, SpatialField>& v, std::uint64_t seed,
                              std::size_t draws = 10000);

}  // namespace collective
