#include "collective/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>

#include "collective/error.hpp"

namespace collective {

namespace {

double grid_point(std::size_t i, std::size_t grid) { return static_cast<double>(i) / static_cast<double>(grid - 1); }

double sup_on_grid(const SpatialFunction::Fn& fn, std::size_t grid) {
  double m = 0.0;
  for (std::size_t i = 0; i < grid; ++i) m = std::max(m, std::abs(fn(grid_point(i, grid))));
  return m;
}

/// (T_n(t), U_{n-1}(t)) by the three-term recurrences; n >= 1.
std::pair<double, double> chebyshev_tu(std::uint32_t n, double t) {
  double t_prev = 1.0, t_cur = t;
  for (std::uint32_t k = 1; k < n; ++k) t_prev = std::exchange(t_cur, 2.0 * t * t_cur - t_prev);
  double u_prev = 1.0, u_cur = 2.0 * t;
  if (n == 1) return {t_cur, 1.0};
  for (std::uint32_t k = 1; k + 1 < n; ++k) u_prev = std::exchange(u_cur, 2.0 * t * u_cur - u_prev);
  return {t_cur, u_cur};
}

}  // namespace

AffineDiffusion::AffineDiffusion(FunctionPtr abar, std::vector<FunctionPtr> psis, double tail_w1inf)
    : abar_(std::move(abar)), psis_(std::move(psis)), tail_w1inf_(tail_w1inf) {
  if (!abar_) throw Error(ErrorCode::InvalidArgument, "diffusion model needs abar");
  if (!(tail_w1inf_ >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tail norm must be nonnegative");
  for (const auto& psi : psis_) {
    if (!psi) throw Error(ErrorCode::InvalidArgument, "null psi");
    sup_.push_back(sup_on_grid([&](double x) { return (*psi)(x); }, kNormGrid));
    semi_.push_back(sup_on_grid([&](double x) { return psi->derivative(x); }, kNormGrid));
  }
  abar_semi_ = sup_on_grid([&](double x) { return abar_->derivative(x); }, kNormGrid);
}

FunctionPtr AffineDiffusion::abar_preset(const std::string& name) {
  if (name == "one") {
    return std::make_shared<const SpatialFunction>([](double) { return 1.0; }, [](double) { return 0.0; }, "one");
  }
  if (name == "one-plus-bump") {
    constexpr double pi = std::numbers::pi;
    return std::make_shared<const SpatialFunction>([](double x) { return 1.0 + 0.3 * std::sin(pi * x); },
                                                   [](double x) { return 0.3 * pi * std::cos(pi * x); },
                                                   "one-plus-bump");
  }
  throw Error(ErrorCode::ConfigError, "unknown abar preset '" + name + "'");
}

std::vector<FunctionPtr> AffineDiffusion::psi_family(const PsiFamily& family) {
  std::vector<FunctionPtr> out;
  constexpr double pi = std::numbers::pi;
  for (std::uint32_t j = 1; j <= family.count; ++j) {
    const double c = family.amplitude * std::pow(static_cast<double>(j), -family.decay);
    const double jd = static_cast<double>(j);
    const std::string name = family.shape + "[" + std::to_string(j) + "]";
    if (family.shape == "sine") {
      out.push_back(std::make_shared<const SpatialFunction>([c, jd](double x) { return c * std::sin(jd * pi * x); },
                                                            [c, jd](double x) { return c * jd * pi * std::cos(jd * pi * x); },
                                                            name));
    } else if (family.shape == "chebyshev-bump") {
      out.push_back(std::make_shared<const SpatialFunction>(
          [c, j](double x) { return c * 4.0 * x * (1.0 - x) * chebyshev_tu(j, 2.0 * x - 1.0).first; },
          [c, j](double x) {
            auto [tn, un1] = chebyshev_tu(j, 2.0 * x - 1.0);
            return c * (4.0 * (1.0 - 2.0 * x) * tn + 8.0 * x * (1.0 - x) * static_cast<double>(j) * un1);
          },
          name));
    } else {
      throw Error(ErrorCode::ConfigError, "unknown psi shape '" + family.shape + "'");
    }
  }
  return out;
}

AffineDiffusion AffineDiffusion::from_preset(const std::string& abar_preset_name, const PsiFamily& family) {
  return AffineDiffusion(abar_preset(abar_preset_name), psi_family(family));
}

const SpatialFunction& AffineDiffusion::psi(std::uint32_t j) const { return *psi_ptr(j); }

const FunctionPtr& AffineDiffusion::psi_ptr(std::uint32_t j) const {
  if (j == 0 || j > psis_.size()) throw Error(ErrorCode::InvalidArgument, "psi index out of range");
  return psis_[j - 1];
}

std::vector<double> AffineDiffusion::element_integrals(std::span<const double> y, std::uint32_t k) const {
  if (y.size() > psis_.size()) throw Error(ErrorCode::InvalidArgument, "parameter has more entries than J");
  std::vector<double> m = abar_->element_integrals(k);
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (y[j] == 0.0) continue;
    const auto& mj = psis_[j]->element_integrals(k);
    for (std::size_t e = 0; e < m.size(); ++e) m[e] += y[j] * mj[e];
  }
  return m;
}

Ellipticity ellipticity_bounds(const AffineDiffusion& a, std::size_t grid) {
  if (grid < 64) throw Error(ErrorCode::InvalidArgument, "ellipticity grid needs at least 64 points");
  Ellipticity out{INFINITY, -INFINITY};
  for (std::size_t i = 0; i < grid; ++i) {
    const double x = grid_point(i, grid);
    double spread = 0.0;
    for (std::uint32_t j = 1; j <= a.J(); ++j) spread += std::abs(a.psi(j)(x));
    const double ab = a.abar()(x);
    out.r = std::min(out.r, ab - spread);
    out.R = std::max(out.R, ab + spread);
  }
  if (!(out.r > 0.0)) {
    throw Error(ErrorCode::EllipticityViolation,
                "min(abar - sum|psi_j|) = " + std::to_string(out.r) + " is not positive");
  }
  return out;
}

RegularityConstants regularity_constants(const AffineDiffusion& a, double f_norm, std::size_t grid) {
  RegularityConstants out;
  out.r = ellipticity_bounds(a, grid).r;
  out.a_semi = a.abar_semi();
  for (std::uint32_t j = 1; j <= a.J(); ++j) out.a_semi += a.psi_semi(j);
  const double ar = out.a_semi / out.r;
  out.K = (1.0 / out.r) * (1.0 + (1.0 + ar)) * f_norm;
  for (std::uint32_t j = 1; j <= a.J(); ++j) {
    const double bj = (1.0 / out.r) * ((ar + 2.0) * a.psi_sup(j) + a.psi_semi(j));
    out.b.push_back(bj);
    out.d.push_back(bj / std::sqrt(3.0));
  }
  return out;
}

GateResult summability_gate(std::span<const double> c, double p) {
  GateResult out;
  for (double v : c) out.l1 += std::abs(v);
  out.margin = 1.0 - out.l1;
  const bool strict = p <= 1.0;
  out.admissible = strict ? out.l1 < 1.0 : out.l1 <= 1.0;
  if (!out.admissible) {
    out.reason = "||c||_1 = " + std::to_string(out.l1) + (strict ? " >= 1" : " > 1");
  }
  return out;
}

WeightRule superposed_weight(std::vector<double> b) { return WeightRule::superposed_factorial(std::move(b)); }

CollocWeightInfo colloc_weight_info(const AffineDiffusion& a, double q, double r) {
  if (!(q > 1.0)) throw Error(ErrorCode::InvalidArgument, "Lebesgue exponent q must exceed 1");
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "ellipticity constant r must be positive");
  const std::uint32_t J = a.J();
  const double limit = r / (12.0 * std::exp(q));
  std::vector<double> w(J);
  for (std::uint32_t j = 1; j <= J; ++j) w[j - 1] = a.psi_w1inf(j);
  std::optional<std::uint32_t> j0;
  for (std::uint32_t cand = 0; cand <= J; ++cand) {
    double tail = a.tail_w1inf();
    for (std::uint32_t j = cand + 1; j <= J; ++j) tail += w[j - 1];
    if (tail <= limit) {
      j0 = cand;
      break;
    }
  }
  if (!j0) {
    throw Error(ErrorCode::SplitInfeasible, "no j0 <= " + std::to_string(J) + " meets sum_{j>j0} ||psi_j|| <= " +
                                                std::to_string(limit));
  }
  double sum_e = 0.0;
  for (std::uint32_t j = 1; j <= *j0; ++j) sum_e += w[j - 1];
  const double lambda = sum_e > 0.0 ? std::min(2.0, 1.0 + r / (6.0 * sum_e)) : 2.0;
  SplitParameters params;
  params.lambda = lambda;
  params.j0 = *j0;
  params.q = q;
  params.r = r;
  params.w1inf = std::move(w);
  return {WeightRule::collocation_split(std::move(params)), *j0, lambda};
}

WeightRule colloc_weight(const AffineDiffusion& a, double q, double r) { return colloc_weight_info(a, q, r).rule; }

}  // namespace collective
