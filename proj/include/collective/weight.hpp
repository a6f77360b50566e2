#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "collective/multiindex.hpp"

namespace collective {

enum class WeightKind { SuperposedFactorial, CollocationSplit, Custom };

/// Parameters of the split rule
///   sigma_s = prod_{j<=j0} (2 lambda/(lambda+1))^{s_j}
///           * prod_{j>j0} rho_j(s)^{s_j} (s_j+1)^q,
///   rho_j(s) = e^q + r s_j / (4 |s_F| |psi_j|_{W1,inf}).
struct SplitParameters {
  double lambda = 1.0;
  std::uint32_t j0 = 0;
  double q = 4.0;
  double r = 1.0;
  std::vector<double> w1inf;  ///< |psi_j|_{W1,inf} for j = 1..J
};

/// A positive weight sigma on multi-indices over J active dimensions.
class WeightRule {
 public:
  using Sigma = std::function<double(const MultiIndex&)>;

  static WeightRule superposed_factorial(std::vector<double> b);
  static WeightRule collocation_split(SplitParameters params);
  static WeightRule custom(std::uint32_t active_dims, Sigma sigma, std::string name);

  WeightKind kind() const noexcept { return kind_; }
  std::uint32_t active_dims() const noexcept { return dims_; }
  const std::string& identifier() const noexcept { return name_; }

  /// sigma_s. Dimensions beyond active_dims() must carry zero exponent.
  double sigma(const MultiIndex& s) const;
  /// sigma_s^p, the quantity compared against T 2^{-k}.
  double sigma_pow(const MultiIndex& s, double p) const;

  /// Generating sequence b (superposed rule only).
  const std::vector<double>& b() const noexcept { return b_; }
  const SplitParameters& split() const noexcept { return split_; }

  /// True when sigma_s = prod_j g_j(s_j), which lets sums factor over dimensions.
  bool separable() const noexcept;
  /// g_j(m) for a separable rule.
  double sigma_1d(std::uint32_t j, std::uint32_t m) const;

 private:
  WeightKind kind_ = WeightKind::Custom;
  std::uint32_t dims_ = 0;
  std::string name_;
  std::vector<double> b_;
  SplitParameters split_;
  Sigma custom_;
};

/// Result of an l_p mass computation sum_s sigma_s^{-p}.
struct LpMass {
  double mass = 0.0;
  double tail_estimate = 0.0;
  bool certified = false;  ///< tail_estimate < 1% of mass
  std::size_t terms = 0;   ///< multi-indices or layers summed explicitly
};

struct LpMassOptions {
  double eps_cut = 1e-14;         ///< relative cut for explicit summation
  std::size_t budget = 4'000'000; ///< cap on enumerated indices
};

/// ||(sigma_s^{-1})||_{l_p}^p.
///
/// Superposed rules are summed by total-degree layers, using
/// |s|!/s! = prod_j C(s_1+...+s_j, s_j) to run a dimension recursion per layer.
/// Separable rules factor into one-dimensional series. Everything else is
/// enumerated over the order ideal {sigma_s^{-p} >= eps_cut} with a geometric
/// tail estimate taken at the frontier.
LpMass lp_mass(const WeightRule& rule, double p, const LpMassOptions& options = {});

}  // namespace collective
