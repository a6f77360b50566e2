#include "collective/multiindex.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "collective/error.hpp"

namespace collective {

namespace {

std::uint32_t parse_u32(std::string_view text, std::string_view whole) {
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::InvalidArgument, "malformed multi-index '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

MultiIndex::MultiIndex(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.dim < b.dim; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].dim == 0) throw Error(ErrorCode::InvalidArgument, "multi-index dimensions are 1-based");
    if (i > 0 && entries[i].dim == entries[i - 1].dim) {
      throw Error(ErrorCode::InvalidArgument, "duplicate dimension " + std::to_string(entries[i].dim));
    }
    if (entries[i].exp > 0) entries_.push_back(entries[i]);
  }
}

MultiIndex MultiIndex::unit(std::uint32_t j) { return MultiIndex({{j, 1}}); }

MultiIndex MultiIndex::from_dense(std::span<const std::uint32_t> exps) {
  MultiIndex s;
  for (std::size_t i = 0; i < exps.size(); ++i) {
    if (exps[i] > 0) s.entries_.push_back({static_cast<std::uint32_t>(i + 1), exps[i]});
  }
  return s;
}

MultiIndex MultiIndex::parse(std::string_view text) {
  if (text == "0" || text.empty()) return {};
  std::vector<Entry> entries;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view item = text.substr(pos, comma - pos);
    std::size_t colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::InvalidArgument, "malformed multi-index '" + std::string(text) + "'");
    }
    std::uint32_t dim = parse_u32(item.substr(0, colon), text);
    std::uint32_t exp = parse_u32(item.substr(colon + 1), text);
    if (exp == 0) throw Error(ErrorCode::InvalidArgument, "zero exponent in '" + std::string(text) + "'");
    if (!entries.empty() && dim <= entries.back().dim) {
      throw Error(ErrorCode::InvalidArgument, "dimensions not increasing in '" + std::string(text) + "'");
    }
    entries.push_back({dim, exp});
    pos = comma + 1;
  }
  return MultiIndex(std::move(entries));
}

std::uint32_t MultiIndex::operator[](std::uint32_t j) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), j,
                             [](const Entry& e, std::uint32_t d) { return e.dim < d; });
  return (it != entries_.end() && it->dim == j) ? it->exp : 0;
}

std::uint32_t MultiIndex::order() const noexcept {
  std::uint32_t n = 0;
  for (const auto& e : entries_) n += e.exp;
  return n;
}

MultiIndex MultiIndex::incremented(std::uint32_t j) const {
  if (j == 0) throw Error(ErrorCode::InvalidArgument, "multi-index dimensions are 1-based");
  MultiIndex out = *this;
  auto it = std::lower_bound(out.entries_.begin(), out.entries_.end(), j,
                             [](const Entry& e, std::uint32_t d) { return e.dim < d; });
  if (it != out.entries_.end() && it->dim == j) {
    ++it->exp;
  } else {
    out.entries_.insert(it, {j, 1});
  }
  return out;
}

MultiIndex MultiIndex::decremented(std::uint32_t j) const {
  MultiIndex out = *this;
  auto it = std::lower_bound(out.entries_.begin(), out.entries_.end(), j,
                             [](const Entry& e, std::uint32_t d) { return e.dim < d; });
  if (it == out.entries_.end() || it->dim != j) {
    throw Error(ErrorCode::InvalidArgument, "cannot decrement zero exponent in dimension " + std::to_string(j));
  }
  if (--it->exp == 0) out.entries_.erase(it);
  return out;
}

bool MultiIndex::is_below(const MultiIndex& other) const noexcept {
  for (const auto& e : entries_) {
    if (other[e.dim] < e.exp) return false;
  }
  return true;
}

std::vector<std::uint32_t> MultiIndex::dense(std::uint32_t dims) const {
  std::vector<std::uint32_t> out(dims, 0);
  for (const auto& e : entries_) {
    if (e.dim > dims) throw Error(ErrorCode::InvalidArgument, "multi-index exceeds " + std::to_string(dims) + " dims");
    out[e.dim - 1] = e.exp;
  }
  return out;
}

std::string MultiIndex::to_string() const {
  if (entries_.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(entries_[i].dim);
    out += ':';
    out += std::to_string(entries_[i].exp);
  }
  return out;
}

double factorial_product(const MultiIndex& s) {
  double v = 1.0;
  for (const auto& e : s.entries()) v *= std::tgamma(static_cast<double>(e.exp) + 1.0);
  return v;
}

std::optional<std::uint64_t> multinomial_exact(const MultiIndex& s) {
  if (s.order() > 20) return std::nullopt;
  // Product of binomials C(n_1+...+n_i, n_i); every partial result divides exactly.
  unsigned __int128 result = 1;
  std::uint64_t total = 0;
  for (const auto& e : s.entries()) {
    for (std::uint64_t i = 1; i <= e.exp; ++i) {
      ++total;
      result = result * total / i;
    }
  }
  return static_cast<std::uint64_t>(result);
}

double multinomial(const MultiIndex& s) {
  if (auto exact = multinomial_exact(s)) return static_cast<double>(*exact);
  double lg = std::lgamma(static_cast<double>(s.order()) + 1.0);
  for (const auto& e : s.entries()) lg -= std::lgamma(static_cast<double>(e.exp) + 1.0);
  return std::exp(lg);
}

bool is_downward_closed(const std::set<MultiIndex>& members) {
  for (const auto& s : members) {
    for (const auto& e : s.entries()) {
      if (!members.count(s.decremented(e.dim))) return false;
    }
  }
  return true;
}

bool is_downward_closed(std::span<const MultiIndex> members) {
  return is_downward_closed(std::set<MultiIndex>(members.begin(), members.end()));
}

DownwardClosedSet::DownwardClosedSet(std::set<MultiIndex> members) : members_(std::move(members)) {
  if (!is_downward_closed(members_)) throw Error(ErrorCode::NotLowerSet, "index set is not downward closed");
}

std::vector<MultiIndex> DownwardClosedSet::graded_order() const {
  std::vector<MultiIndex> out(members_.begin(), members_.end());
  std::sort(out.begin(), out.end(), GradedLess{});
  return out;
}

std::uint32_t DownwardClosedSet::max_dim() const noexcept {
  std::uint32_t m = 0;
  for (const auto& s : members_) m = std::max(m, s.max_dim());
  return m;
}

std::vector<std::uint32_t> DownwardClosedSet::active_dims() const {
  std::set<std::uint32_t> dims;
  for (const auto& s : members_) {
    for (const auto& e : s.entries()) dims.insert(e.dim);
  }
  return {dims.begin(), dims.end()};
}

}  // namespace collective

std::size_t std::hash<collective::MultiIndex>::operator()(const collective::MultiIndex& s) const noexcept {
  std::size_t h = 0x9e3779b97f4a7c15ULL;
  for (const auto& e : s.entries()) {
    h ^= (static_cast<std::size_t>(e.dim) << 32 | e.exp) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}
