#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "collective/multiindex.hpp"
#include "collective/weight.hpp"

namespace collective {

struct EnumerationOptions {
  std::size_t candidate_cap = 4'000'000;
  double monotone_rtol = 1e-12;  ///< slack allowed when probing sigma_{s-e^j} <= sigma_s
};

/// All s with sigma_s^p <= bound, paired with sigma_s^p, in MultiIndex order.
///
/// Monotone rules are explored by a frontier search from 0_F that probes every
/// generated index against its predecessors. The superposed rule is not
/// coordinate-monotone, so it is enumerated by a depth-first search over
/// dimensions pruned with sup_m C(n+m, m) B^m, B the remaining l_1 mass of b.
std::vector<std::pair<MultiIndex, double>> admissible_indices(const WeightRule& rule, double p, double bound,
                                                              const EnumerationOptions& options = {});

/// Largest k with 2^k * sigma_p <= T, or -1 if none.
int max_admissible_level(double sigma_p, double T);

/// G = {(k,s) : 2^k sigma_s^p <= T}, stored as s -> kappa(s) = max admissible k.
class CollectiveIndexSet {
 public:
  CollectiveIndexSet() = default;
  CollectiveIndexSet(double p, double T, std::string weight_id, std::map<MultiIndex, std::uint32_t> kappa);

  double p() const noexcept { return p_; }
  double T() const noexcept { return T_; }
  const std::string& weight_id() const noexcept { return weight_id_; }

  bool empty() const noexcept { return kappa_.empty(); }
  /// Number of (k,s) pairs.
  std::size_t size() const noexcept;
  /// Number of distinct s.
  std::size_t parametric_size() const noexcept { return kappa_.size(); }

  bool contains(std::uint32_t k, const MultiIndex& s) const;
  std::optional<std::uint32_t> kappa(const MultiIndex& s) const;
  const std::map<MultiIndex, std::uint32_t>& levels() const noexcept { return kappa_; }
  /// k* = max level over G.
  std::optional<std::uint32_t> max_level() const;

  /// All pairs sorted by (k, s).
  std::vector<std::pair<std::uint32_t, MultiIndex>> pairs() const;

  /// Line-oriented text: a '#' header with p, T and weight, then "k<TAB>multiindex".
  void write_text(std::ostream& out) const;
  static CollectiveIndexSet read_text(std::istream& in);

  friend bool operator==(const CollectiveIndexSet&, const CollectiveIndexSet&) = default;

 private:
  double p_ = 1.0;
  double T_ = 0.0;
  std::string weight_id_;
  std::map<MultiIndex, std::uint32_t> kappa_;
};

CollectiveIndexSet build_G(const WeightRule& weight, double p, double T, const EnumerationOptions& options = {});

/// Lambda_0, Lambda_1, ..., Lambda_{k*}; empty when G is empty.
std::vector<std::set<MultiIndex>> level_sections(const CollectiveIndexSet& G);

/// sum_{(k,s) in G} 2^k.
std::uint64_t work_bound(const CollectiveIndexSet& G);

/// T_n = n / (2 lp_mass), so 2 lp_mass T_n <= n < 4 lp_mass T_n.
double choose_T(std::int64_t n, double p, double lp_mass);

/// Lower closure of the parametric part of G with working levels: each s maps
/// to the finest kappa(s') over members s' of G with s <= s'.
std::map<MultiIndex, std::uint32_t> closure_levels(const CollectiveIndexSet& G);

/// alpha* = alpha if alpha <= 1/p - 1, else alpha - 1/p + 1.
double alpha_star(double p, double alpha);
/// Explicit constant of the complement-sum bound: mass / (2^{alpha*} - 1).
double tail_constant(double p, double alpha, double mass);
/// The constant the complement-sum argument actually delivers: 2^{alpha*} mass / (2^{alpha*} - 1).
double tail_constant_sharp(double p, double alpha, double mass);

struct TailWindow {
  std::uint32_t k_max = 40;
  double sigma_inv_floor = 1e-12;  ///< only s with sigma_s^{-1} >= floor enter the window
};

/// sum over (k,s) not in G(T), k <= k_max, s in the window, of 2^{-alpha k} sigma_s^{-1}.
double tail_window_sum(const WeightRule& weight, double p, double T, double alpha, const TailWindow& window = {},
                       const EnumerationOptions& options = {});

}  // namespace collective
