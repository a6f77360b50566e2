#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "collective/fem1d.hpp"
#include "collective/weight.hpp"

namespace collective {

/// Resolution of the grid used for sup-norms of the spatial functions.
inline constexpr std::size_t kNormGrid = 4097;

/// psi_j = amplitude * j^{-decay} * shape_j(x), j = 1..count.
///   sine:           shape_j = sin(j pi x)
///   chebyshev-bump: shape_j = 4x(1-x) T_j(2x-1)
struct PsiFamily {
  double amplitude = 0.0;
  double decay = 3.0;
  std::uint32_t count = 0;
  std::string shape = "sine";
};

/// a(y) = abar + sum_j y_j psi_j, y in [-1,1]^J.
class AffineDiffusion {
 public:
  /// tail_w1inf is an optional bound for sum_{j>J} ||psi_j||_{W1,inf} of a
  /// model truncated from an infinite expansion; zero means the expansion is finite.
  AffineDiffusion(FunctionPtr abar, std::vector<FunctionPtr> psis, double tail_w1inf = 0.0);

  /// abar presets: "one" (1) and "one-plus-bump" (1 + 0.3 sin(pi x)).
  static AffineDiffusion from_preset(const std::string& abar_preset, const PsiFamily& family);
  static FunctionPtr abar_preset(const std::string& name);
  static std::vector<FunctionPtr> psi_family(const PsiFamily& family);

  std::uint32_t J() const noexcept { return static_cast<std::uint32_t>(psis_.size()); }
  const SpatialFunction& abar() const { return *abar_; }
  const FunctionPtr& abar_ptr() const noexcept { return abar_; }
  /// 1-based.
  const SpatialFunction& psi(std::uint32_t j) const;
  const FunctionPtr& psi_ptr(std::uint32_t j) const;

  double psi_sup(std::uint32_t j) const { return sup_.at(j - 1); }    ///< ||psi_j||_{L_inf}
  double psi_semi(std::uint32_t j) const { return semi_.at(j - 1); }  ///< |psi_j|_{W1,inf}
  double psi_w1inf(std::uint32_t j) const { return psi_sup(j) + psi_semi(j); }
  double abar_semi() const noexcept { return abar_semi_; }
  double tail_w1inf() const noexcept { return tail_w1inf_; }

  /// Element integrals of a(y) on level k, from the affine combination of cached integrals.
  std::vector<double> element_integrals(std::span<const double> y, std::uint32_t k) const;

 private:
  FunctionPtr abar_;
  std::vector<FunctionPtr> psis_;
  std::vector<double> sup_, semi_;
  double abar_semi_ = 0.0;
  double tail_w1inf_ = 0.0;
};

struct Ellipticity {
  double r = 0.0;
  double R = 0.0;
};

/// r = min(abar - sum|psi_j|), R = max(abar + sum|psi_j|) over a uniform grid.
Ellipticity ellipticity_bounds(const AffineDiffusion& a, std::size_t grid = kNormGrid);

struct RegularityConstants {
  double r = 0.0;
  double a_semi = 0.0;  ///< triangle bound |abar|_{W1,inf} + sum |psi_j|_{W1,inf}
  double K = 0.0;
  std::vector<double> b;
  std::vector<double> d;
};

/// K = (1/r)[1 + (1 + |a|/r)] ||f||,  b_j = (1/r)[(|a|/r + 2)||psi_j||_inf + |psi_j|_{W1,inf}],  d_j = b_j/sqrt(3).
RegularityConstants regularity_constants(const AffineDiffusion& a, double f_norm, std::size_t grid = kNormGrid);

struct GateResult {
  bool admissible = false;
  double l1 = 0.0;
  double margin = 0.0;  ///< 1 - ||c||_1
  std::string reason;
};

/// p <= 1: admissible iff ||c||_1 < 1; p > 1: admissible iff ||c||_1 <= 1.
GateResult summability_gate(std::span<const double> c, double p);

WeightRule superposed_weight(std::vector<double> b);

struct CollocWeightInfo {
  WeightRule rule;
  std::uint32_t j0 = 0;
  double lambda = 1.0;
};

/// The split weight for collocation. j0 is the smallest index with
/// sum_{j>j0} ||psi_j||_{W1,inf} <= r/(12 e^q); lambda = 1 + r/(6 sum_{j<=j0} ||psi_j||) capped at 2.
CollocWeightInfo colloc_weight_info(const AffineDiffusion& a, double q, double r);
WeightRule colloc_weight(const AffineDiffusion& a, double q, double r);

}  // namespace collective
