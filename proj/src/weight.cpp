#include "collective/weight.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "collective/error.hpp"
#include "collective/index_set.hpp"

namespace collective {

namespace {

void check_dims(const MultiIndex& s, std::uint32_t dims) {
  if (s.max_dim() > dims) {
    throw Error(ErrorCode::InvalidArgument,
                "multi-index " + s.to_string() + " exceeds " + std::to_string(dims) + " active dimensions");
  }
}

/// Sum of a positive series term(0), term(1), ... until terms fall below
/// eps * partial sum while shrinking; the remainder is extrapolated geometrically.
template <class Term>
LpMass sum_series(Term term, double eps, std::size_t cap) {
  LpMass out;
  double prev = 0.0;
  for (std::size_t m = 0; m < cap; ++m) {
    double t = term(m);
    out.mass += t;
    ++out.terms;
    if (m > 0 && t < prev && t <= eps * out.mass) {
      double ratio = prev > 0.0 ? t / prev : 0.0;
      out.tail_estimate = ratio < 1.0 ? t * ratio / (1.0 - ratio) : INFINITY;
      out.certified = out.tail_estimate < 0.01 * out.mass;
      return out;
    }
    if (!std::isfinite(out.mass)) break;
    prev = t;
  }
  throw Error(ErrorCode::EnumerationBudgetExceeded, "l_p series did not settle within " + std::to_string(cap) + " terms");
}

LpMass superposed_mass(const WeightRule& rule, double p, const LpMassOptions& options) {
  const auto& b = rule.b();
  const std::size_t J = b.size();
  double l1 = 0.0;
  for (double bj : b) l1 += bj;
  if (J == 0) return {1.0, 0.0, true, 1};
  if (p >= 1.0 && l1 >= 1.0) {
    throw Error(ErrorCode::EnumerationBudgetExceeded, "l_p mass diverges: ||b||_1 >= 1 with p >= 1");
  }
  std::vector<double> logb(J);
  for (std::size_t j = 0; j < J; ++j) logb[j] = std::log(b[j]);

  // layer[j][n] = sum over s supported in dims 1..j+1 with |s| = n of (|s|!/s!)^p b^{ps}.
  std::vector<std::vector<double>> layer(J);
  std::vector<double> lgam;
  const std::size_t cap = std::min<std::size_t>(options.budget, 20000);
  auto lg = [&](std::size_t n) {
    while (lgam.size() <= n) lgam.push_back(std::lgamma(static_cast<double>(lgam.size()) + 1.0));
    return lgam[n];
  };
  return sum_series(
      [&](std::size_t n) {
        for (std::size_t j = 0; j < J; ++j) {
          double v;
          if (j == 0) {
            v = std::exp(p * static_cast<double>(n) * logb[0]);
          } else {
            v = 0.0;
            for (std::size_t m = 0; m <= n; ++m) {
              double lc = lg(n) - lg(m) - lg(n - m);
              v += std::exp(p * (lc + static_cast<double>(m) * logb[j])) * layer[j - 1][n - m];
            }
          }
          layer[j].push_back(v);
        }
        return layer[J - 1][n];
      },
      options.eps_cut, cap);
}

LpMass separable_mass(const WeightRule& rule, double p, const LpMassOptions& options) {
  LpMass out{1.0, 0.0, true, 0};
  double rel_tail = 0.0;
  for (std::uint32_t j = 1; j <= rule.active_dims(); ++j) {
    LpMass one = sum_series([&](std::size_t m) { return std::pow(rule.sigma_1d(j, static_cast<std::uint32_t>(m)), -p); },
                            options.eps_cut, options.budget);
    out.mass *= one.mass;
    out.terms += one.terms;
    rel_tail = (1.0 + rel_tail) * (1.0 + one.tail_estimate / one.mass) - 1.0;
  }
  out.tail_estimate = rel_tail * out.mass;
  out.certified = out.tail_estimate < 0.01 * out.mass;
  return out;
}

LpMass enumerated_mass(const WeightRule& rule, double p, const LpMassOptions& options) {
  EnumerationOptions enum_options;
  enum_options.candidate_cap = options.budget;
  auto ideal = admissible_indices(rule, 1.0, std::pow(options.eps_cut, -1.0 / p), enum_options);
  LpMass out;
  std::set<MultiIndex> members;
  for (const auto& [s, sig] : ideal) {
    out.mass += std::pow(sig, -p);
    members.insert(s);
  }
  out.terms = ideal.size();
  std::set<MultiIndex> frontier;
  for (const auto& s : members) {
    for (std::uint32_t j = 1; j <= rule.active_dims(); ++j) {
      MultiIndex t = s.incremented(j);
      if (!members.count(t)) frontier.insert(t);
    }
  }
  double front = 0.0, ratio = 0.0;
  for (const auto& t : frontier) {
    double wt = std::pow(rule.sigma(t), -p);
    front += wt;
    for (std::uint32_t j = 1; j <= rule.active_dims(); ++j) {
      ratio = std::max(ratio, std::pow(rule.sigma(t.incremented(j)), -p) / wt);
    }
  }
  ratio = std::min(ratio, 0.99);
  out.tail_estimate = front / (1.0 - ratio);
  out.certified = out.tail_estimate < 0.01 * out.mass;
  return out;
}

}  // namespace

WeightRule WeightRule::superposed_factorial(std::vector<double> b) {
  for (double bj : b) {
    if (!(bj > 0.0) || !std::isfinite(bj)) throw Error(ErrorCode::InvalidArgument, "superposed weight needs b_j > 0");
  }
  WeightRule rule;
  rule.kind_ = WeightKind::SuperposedFactorial;
  rule.dims_ = static_cast<std::uint32_t>(b.size());
  rule.name_ = "superposed-factorial";
  rule.b_ = std::move(b);
  return rule;
}

WeightRule WeightRule::collocation_split(SplitParameters params) {
  if (!(params.lambda > 1.0)) throw Error(ErrorCode::InvalidArgument, "split weight needs lambda > 1");
  if (params.j0 > params.w1inf.size()) throw Error(ErrorCode::InvalidArgument, "split weight needs j0 <= J");
  if (!(params.r > 0.0)) throw Error(ErrorCode::InvalidArgument, "split weight needs r > 0");
  WeightRule rule;
  rule.kind_ = WeightKind::CollocationSplit;
  rule.dims_ = static_cast<std::uint32_t>(params.w1inf.size());
  rule.name_ = "collocation-split";
  rule.split_ = std::move(params);
  return rule;
}

WeightRule WeightRule::custom(std::uint32_t active_dims, Sigma sigma, std::string name) {
  WeightRule rule;
  rule.kind_ = WeightKind::Custom;
  rule.dims_ = active_dims;
  rule.name_ = std::move(name);
  rule.custom_ = std::move(sigma);
  return rule;
}

double WeightRule::sigma(const MultiIndex& s) const {
  check_dims(s, dims_);
  switch (kind_) {
    case WeightKind::SuperposedFactorial: {
      if (auto exact = multinomial_exact(s)) {
        double inv = static_cast<double>(*exact);
        for (const auto& e : s.entries()) inv *= std::pow(b_[e.dim - 1], static_cast<double>(e.exp));
        return 1.0 / inv;
      }
      double log_inv = std::log(multinomial(s));
      if (!std::isfinite(log_inv)) {
        log_inv = std::lgamma(static_cast<double>(s.order()) + 1.0);
        for (const auto& e : s.entries()) log_inv -= std::lgamma(static_cast<double>(e.exp) + 1.0);
      }
      for (const auto& e : s.entries()) log_inv += static_cast<double>(e.exp) * std::log(b_[e.dim - 1]);
      return std::exp(-log_inv);
    }
    case WeightKind::CollocationSplit: {
      const double c = 2.0 * split_.lambda / (split_.lambda + 1.0);
      std::uint32_t s_f = 0;
      for (const auto& e : s.entries()) {
        if (e.dim > split_.j0) s_f += e.exp;
      }
      double sig = 1.0;
      for (const auto& e : s.entries()) {
        const double m = static_cast<double>(e.exp);
        if (e.dim <= split_.j0) {
          sig *= std::pow(c, m);
        } else {
          const double w = split_.w1inf[e.dim - 1];
          const double rho = std::exp(split_.q) + split_.r * m / (4.0 * static_cast<double>(s_f) * w);
          sig *= std::pow(rho, m) * std::pow(m + 1.0, split_.q);
        }
      }
      return sig;
    }
    case WeightKind::Custom:
      return custom_(s);
  }
  return 1.0;
}

double WeightRule::sigma_pow(const MultiIndex& s, double p) const { return std::pow(sigma(s), p); }

bool WeightRule::separable() const noexcept {
  if (kind_ == WeightKind::CollocationSplit) return dims_ <= split_.j0 + 1;
  if (kind_ == WeightKind::SuperposedFactorial) return dims_ <= 1;
  return false;
}

double WeightRule::sigma_1d(std::uint32_t j, std::uint32_t m) const {
  if (!separable()) throw Error(ErrorCode::InvalidArgument, "sigma_1d on a non-separable rule");
  if (j == 0 || j > dims_) throw Error(ErrorCode::InvalidArgument, "dimension out of range");
  if (m == 0) return 1.0;
  std::vector<MultiIndex::Entry> e{{j, m}};
  return sigma(MultiIndex(std::move(e)));
}

LpMass lp_mass(const WeightRule& rule, double p, const LpMassOptions& options) {
  if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "p must be positive");
  if (rule.active_dims() == 0) return {std::pow(rule.sigma(MultiIndex{}), -p), 0.0, true, 1};
  if (rule.separable()) return separable_mass(rule, p, options);
  if (rule.kind() == WeightKind::SuperposedFactorial) return superposed_mass(rule, p, options);
  return enumerated_mass(rule, p, options);
}

}  // namespace collective
