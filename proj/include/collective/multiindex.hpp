#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace collective {

/// A finitely supported exponent vector s in F.
///
/// Stored sparsely as (dimension, exponent) pairs with dimensions 1-based and
/// strictly increasing, exponents strictly positive. Absent dimensions carry
/// exponent zero, so the default-constructed value is 0_F.
class MultiIndex {
 public:
  struct Entry {
    std::uint32_t dim;
    std::uint32_t exp;
    friend auto operator<=>(const Entry&, const Entry&) = default;
  };

  MultiIndex() = default;

  /// Builds from arbitrary pairs; zero exponents are dropped, duplicates rejected.
  explicit MultiIndex(std::vector<Entry> entries);

  /// e^j
  static MultiIndex unit(std::uint32_t j);
  /// Dense exponents for dimensions 1..exps.size().
  static MultiIndex from_dense(std::span<const std::uint32_t> exps);
  /// Parses the canonical text form "j1:e1,j2:e2"; "0" denotes 0_F.
  static MultiIndex parse(std::string_view text);

  std::uint32_t operator[](std::uint32_t j) const noexcept;
  std::uint32_t order() const noexcept;  ///< |s|
  bool is_zero() const noexcept { return entries_.empty(); }
  std::size_t support_size() const noexcept { return entries_.size(); }
  std::uint32_t max_dim() const noexcept { return entries_.empty() ? 0 : entries_.back().dim; }
  std::span<const Entry> entries() const noexcept { return entries_; }

  MultiIndex incremented(std::uint32_t j) const;
  /// s - e^j; requires s_j > 0.
  MultiIndex decremented(std::uint32_t j) const;

  /// Coordinatewise s <= t.
  bool is_below(const MultiIndex& other) const noexcept;

  std::vector<std::uint32_t> dense(std::uint32_t dims) const;
  std::string to_string() const;

  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Orders by total degree first, then lexicographically; every prefix of a
/// downward-closed set listed in this order is itself downward closed.
struct GradedLess {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const {
    if (a.order() != b.order()) return a.order() < b.order();
    return a < b;
  }
};

/// s! = prod_j s_j!, in floating point.
double factorial_product(const MultiIndex& s);

/// |s|!/s! exactly when |s| <= 20, std::nullopt otherwise.
std::optional<std::uint64_t> multinomial_exact(const MultiIndex& s);

/// |s|!/s!; exact integer arithmetic up to |s| = 20, log-gamma beyond.
double multinomial(const MultiIndex& s);

bool is_downward_closed(const std::set<MultiIndex>& members);
bool is_downward_closed(std::span<const MultiIndex> members);

/// A finite lower set. Construction validates the downward-closure invariant.
class DownwardClosedSet {
 public:
  DownwardClosedSet() = default;
  /// Throws Error(NotLowerSet) if the members are not downward closed.
  explicit DownwardClosedSet(std::set<MultiIndex> members);

  bool contains(const MultiIndex& s) const { return members_.count(s) != 0; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  const std::set<MultiIndex>& members() const noexcept { return members_; }

  /// Members sorted by (|s|, lexicographic): a linear extension of the partial order.
  std::vector<MultiIndex> graded_order() const;
  /// Largest dimension appearing in any member.
  std::uint32_t max_dim() const noexcept;
  /// Dimensions that appear in at least one member.
  std::vector<std::uint32_t> active_dims() const;

  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  friend bool operator==(const DownwardClosedSet&, const DownwardClosedSet&) = default;

 private:
  std::set<MultiIndex> members_;
};

}  // namespace collective

template <>
struct std::hash<collective::MultiIndex> {
  std::size_t operator()(const collective::MultiIndex& s) const noexcept;
};
