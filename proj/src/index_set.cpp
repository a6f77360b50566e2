#include "collective/index_set.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "collective/error.hpp"

namespace collective {

namespace {

/// sup_{m >= m_from} C(n0+m, m) B^m. The ratio of consecutive terms,
/// (n0+m+1)/(m+1) * B, decreases in m, so the sequence is unimodal.
double sup_binomial_geometric(std::uint32_t n0, double B, std::uint32_t m_from) {
  if (B <= 0.0) return m_from == 0 ? 1.0 : 0.0;
  if (B >= 1.0) return std::numeric_limits<double>::infinity();
  double lc = std::lgamma(static_cast<double>(n0 + m_from) + 1.0) - std::lgamma(static_cast<double>(n0) + 1.0) -
              std::lgamma(static_cast<double>(m_from) + 1.0);
  double term = std::exp(lc + static_cast<double>(m_from) * std::log(B));
  double best = term;
  for (std::uint64_t m = m_from;; ++m) {
    double ratio = static_cast<double>(n0 + m + 1) / static_cast<double>(m + 1) * B;
    if (ratio < 1.0) break;
    term *= ratio;
    best = std::max(best, term);
  }
  return best;
}

class SuperposedSearch {
 public:
  SuperposedSearch(const WeightRule& rule, double p, double bound, std::size_t cap)
      : rule_(rule), p_(p), bound_(bound), cap_(cap), b_(rule.b()), tail_(b_.size() + 1, 0.0) {
    for (std::size_t j = b_.size(); j-- > 0;) tail_[j] = tail_[j + 1] + b_[j];
    if (tail_[0] >= 1.0) {
      throw Error(ErrorCode::EnumerationBudgetExceeded,
                  "superposed enumeration needs ||b||_1 < 1, got " + std::to_string(tail_[0]));
    }
    threshold_ = std::pow(bound, -1.0 / p) * (1.0 - 1e-9);
  }

  std::vector<std::pair<MultiIndex, double>> run() {
    std::vector<MultiIndex::Entry> entries;
    visit(0, entries, 1.0, 0);
    std::sort(out_.begin(), out_.end());
    return std::move(out_);
  }

 private:
  void visit(std::size_t j, std::vector<MultiIndex::Entry>& entries, double v, std::uint32_t n0) {
    if (++nodes_ > cap_) {
      throw Error(ErrorCode::EnumerationBudgetExceeded, "index enumeration exceeded " + std::to_string(cap_) + " nodes");
    }
    if (j == b_.size()) {
      MultiIndex s(entries);
      double sp = rule_.sigma_pow(s, p_);
      if (sp <= bound_) out_.emplace_back(std::move(s), sp);
      return;
    }
    if (v * sup_binomial_geometric(n0, tail_[j], 0) < threshold_) return;
    double ve = v;
    for (std::uint32_t e = 0;; ++e) {
      if (e > 0) {
        if (v * sup_binomial_geometric(n0, tail_[j], e) < threshold_) break;
        ve *= static_cast<double>(n0 + e) / static_cast<double>(e) * b_[j];
        entries.push_back({static_cast<std::uint32_t>(j + 1), e});
      }
      visit(j + 1, entries, ve, n0 + e);
      if (e > 0) entries.pop_back();
    }
  }

  const WeightRule& rule_;
  double p_, bound_;
  std::size_t cap_;
  const std::vector<double>& b_;
  std::vector<double> tail_;
  double threshold_ = 0.0;
  std::size_t nodes_ = 0;
  std::vector<std::pair<MultiIndex, double>> out_;
};

std::vector<std::pair<MultiIndex, double>> frontier_search(const WeightRule& rule, double p, double bound,
                                                           const EnumerationOptions& options) {
  std::map<MultiIndex, double> seen;
  auto cost = [&](const MultiIndex& s) {
    auto it = seen.find(s);
    if (it != seen.end()) return it->second;
    return seen.emplace(s, rule.sigma_pow(s, p)).first->second;
  };
  std::vector<std::pair<MultiIndex, double>> out;
  const MultiIndex zero;
  double c0 = cost(zero);
  if (!(c0 <= bound)) return out;
  std::deque<MultiIndex> queue{zero};
  std::set<MultiIndex> generated{zero};
  out.emplace_back(zero, c0);
  while (!queue.empty()) {
    MultiIndex s = std::move(queue.front());
    queue.pop_front();
    for (std::uint32_t j = 1; j <= rule.active_dims(); ++j) {
      MultiIndex t = s.incremented(j);
      if (!generated.insert(t).second) continue;
      if (generated.size() > options.candidate_cap) {
        throw Error(ErrorCode::EnumerationBudgetExceeded,
                    "candidate frontier exceeded " + std::to_string(options.candidate_cap));
      }
      double ct = cost(t);
      for (const auto& e : t.entries()) {
        MultiIndex pred = t.decremented(e.dim);
        double cp = cost(pred);
        if (cp > ct * (1.0 + options.monotone_rtol)) {
          throw Error(ErrorCode::NonMonotoneWeight, "weight '" + rule.identifier() + "' decreases from " +
                                                        pred.to_string() + " to " + t.to_string());
        }
      }
      if (ct <= bound) {
        out.emplace_back(t, ct);
        queue.push_back(std::move(t));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<std::pair<MultiIndex, double>> admissible_indices(const WeightRule& rule, double p, double bound,
                                                              const EnumerationOptions& options) {
  if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "p must be positive");
  if (!(bound >= 0.0)) throw Error(ErrorCode::InvalidArgument, "bound must be nonnegative");
  if (rule.kind() == WeightKind::SuperposedFactorial) {
    return SuperposedSearch(rule, p, bound, options.candidate_cap).run();
  }
  return frontier_search(rule, p, bound, options);
}

int max_admissible_level(double sigma_p, double T) {
  if (!(sigma_p <= T) || !(sigma_p > 0.0)) return -1;
  int k = static_cast<int>(std::floor(std::log2(T / sigma_p)));
  k = std::clamp(k, 0, 1000);
  while (k > 0 && std::ldexp(sigma_p, k) > T) --k;
  while (std::ldexp(sigma_p, k + 1) <= T) ++k;
  return k;
}

CollectiveIndexSet::CollectiveIndexSet(double p, double T, std::string weight_id,
                                       std::map<MultiIndex, std::uint32_t> kappa)
    : p_(p), T_(T), weight_id_(std::move(weight_id)), kappa_(std::move(kappa)) {}

std::size_t CollectiveIndexSet::size() const noexcept {
  std::size_t n = 0;
  for (const auto& [s, k] : kappa_) n += k + 1;
  return n;
}

bool CollectiveIndexSet::contains(std::uint32_t k, const MultiIndex& s) const {
  auto it = kappa_.find(s);
  return it != kappa_.end() && k <= it->second;
}

std::optional<std::uint32_t> CollectiveIndexSet::kappa(const MultiIndex& s) const {
  auto it = kappa_.find(s);
  if (it == kappa_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> CollectiveIndexSet::max_level() const {
  if (kappa_.empty()) return std::nullopt;
  std::uint32_t m = 0;
  for (const auto& [s, k] : kappa_) m = std::max(m, k);
  return m;
}

std::vector<std::pair<std::uint32_t, MultiIndex>> CollectiveIndexSet::pairs() const {
  std::vector<std::pair<std::uint32_t, MultiIndex>> out;
  out.reserve(size());
  for (const auto& [s, kap] : kappa_) {
    for (std::uint32_t k = 0; k <= kap; ++k) out.emplace_back(k, s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void CollectiveIndexSet::write_text(std::ostream& out) const {
  std::ostringstream head;
  head << std::setprecision(17) << "# p=" << p_ << " T=" << T_ << " weight=" << weight_id_ << '\n';
  out << head.str();
  for (const auto& [k, s] : pairs()) out << k << '\t' << s.to_string() << '\n';
}

CollectiveIndexSet CollectiveIndexSet::read_text(std::istream& in) {
  double p = 1.0, T = 0.0;
  std::string weight;
  std::map<MultiIndex, std::uint32_t> kappa;
  std::map<MultiIndex, std::set<std::uint32_t>> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tok;
      while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        try {
          if (key == "p") p = std::stod(val);
          else if (key == "T") T = std::stod(val);
          else if (key == "weight") weight = val;
        } catch (const std::exception&) {
          throw Error(ErrorCode::IoError, "bad index-set header: " + line);
        }
      }
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::IoError, "bad index-set line: " + line);
    std::uint32_t k = 0;
    try {
      k = static_cast<std::uint32_t>(std::stoul(line.substr(0, tab)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::IoError, "bad level in line: " + line);
    }
    MultiIndex s = MultiIndex::parse(line.substr(tab + 1));
    seen[s].insert(k);
  }
  for (const auto& [s, ks] : seen) {
    std::uint32_t top = *ks.rbegin();
    if (ks.size() != top + 1) throw Error(ErrorCode::IoError, "levels not contiguous for " + s.to_string());
    kappa.emplace(s, top);
  }
  return CollectiveIndexSet(p, T, weight, std::move(kappa));
}

CollectiveIndexSet build_G(const WeightRule& weight, double p, double T, const EnumerationOptions& options) {
  if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "p must be positive");
  if (!(T >= 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be nonnegative");
  std::map<MultiIndex, std::uint32_t> kappa;
  for (auto& [s, sp] : admissible_indices(weight, p, T, options)) {
    int k = max_admissible_level(sp, T);
    if (k >= 0) kappa.emplace(std::move(s), static_cast<std::uint32_t>(k));
  }
  return CollectiveIndexSet(p, T, weight.identifier(), std::move(kappa));
}

std::vector<std::set<MultiIndex>> level_sections(const CollectiveIndexSet& G) {
  std::vector<std::set<MultiIndex>> out;
  auto top = G.max_level();
  if (!top) return out;
  out.resize(*top + 1);
  for (const auto& [s, kap] : G.levels()) {
    for (std::uint32_t k = 0; k <= kap; ++k) out[k].insert(s);
  }
  return out;
}

std::uint64_t work_bound(const CollectiveIndexSet& G) {
  std::uint64_t total = 0;
  for (const auto& [s, kap] : G.levels()) total += (std::uint64_t{2} << kap) - 1;
  return total;
}

double choose_T(std::int64_t n, double /*p*/, double lp_mass) {
  if (n < 1) throw Error(ErrorCode::InvalidBudget, "budget must be at least 1, got " + std::to_string(n));
  if (!(lp_mass > 0.0) || !std::isfinite(lp_mass)) {
    throw Error(ErrorCode::InvalidArgument, "l_p mass must be positive and finite");
  }
  const double nd = static_cast<double>(n);
  const double T = nd / (2.0 * lp_mass);
  const double eps = std::numeric_limits<double>::epsilon() * nd;
  if (!(2.0 * lp_mass * T <= nd + eps) || !(nd < 4.0 * lp_mass * T + eps)) {
    throw Error(ErrorCode::InvalidBudget, "threshold inequalities fail for n = " + std::to_string(n));
  }
  return T;
}

std::map<MultiIndex, std::uint32_t> closure_levels(const CollectiveIndexSet& G) {
  std::map<MultiIndex, std::uint32_t> level;
  std::deque<MultiIndex> work;
  for (const auto& [s, k] : G.levels()) {
    level[s] = k;
    work.push_back(s);
  }
  std::set<MultiIndex> closure(work.begin(), work.end());
  while (!work.empty()) {
    MultiIndex s = std::move(work.front());
    work.pop_front();
    for (const auto& e : s.entries()) {
      MultiIndex pred = s.decremented(e.dim);
      if (closure.insert(pred).second) work.push_back(std::move(pred));
    }
  }
  std::vector<MultiIndex> order(closure.begin(), closure.end());
  std::sort(order.begin(), order.end(), GradedLess{});
  for (const auto& s : order) level.try_emplace(s, 0);
  // Propagate downwards: every predecessor inherits at least its successor's level.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    std::uint32_t k = level[*it];
    for (const auto& e : it->entries()) {
      MultiIndex pred = it->decremented(e.dim);
      auto& kp = level[pred];
      kp = std::max(kp, k);
    }
  }
  return level;
}

double alpha_star(double p, double alpha) {
  const double edge = 1.0 / p - 1.0;
  return alpha <= edge ? alpha : alpha - edge;
}

double tail_constant(double p, double alpha, double mass) {
  return mass / (std::exp2(alpha_star(p, alpha)) - 1.0);
}

double tail_constant_sharp(double p, double alpha, double mass) {
  const double a = std::exp2(alpha_star(p, alpha));
  return a * mass / (a - 1.0);
}

double tail_window_sum(const WeightRule& weight, double p, double T, double alpha, const TailWindow& window,
                       const EnumerationOptions& options) {
  auto members = admissible_indices(weight, 1.0, 1.0 / window.sigma_inv_floor, options);
  double sum = 0.0;
  for (const auto& [s, sig] : members) {
    int kap = max_admissible_level(std::pow(sig, p), T);
    for (int k = kap + 1; k <= static_cast<int>(window.k_max); ++k) sum += std::exp2(-alpha * k) / sig;
  }
  return sum;
}

}  // namespace collective
