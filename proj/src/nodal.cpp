#include "collective/nodal.hpp"

#include <cmath>
#include <string>

#include "collective/error.hpp"

namespace collective {

namespace {

const double kGaussT[3] = {0.5 * (1.0 - std::sqrt(0.6)), 0.5, 0.5 * (1.0 + std::sqrt(0.6))};
const double kGaussW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

/// int_lo^hi g by 3-point Gauss.
double gauss3(const SpatialFunction& g, double lo, double hi) {
  double s = 0.0;
  for (int q = 0; q < 3; ++q) s += kGaussW[q] * g(lo + kGaussT[q] * (hi - lo));
  return s * (hi - lo);
}

}  // namespace

NodalSolver::NodalSolver(const AffineDiffusion& a, const FunctionPtr& f, std::uint32_t quad_level)
    : m_(quad_level) {
  check_level(m_);
  const std::size_t n = std::size_t{1} << m_;
  const double h = std::ldexp(1.0, -static_cast<int>(m_));
  w_.reserve(3 * n);
  abar_.reserve(3 * n);
  F_.reserve(3 * n);
  psi_.assign(a.J(), {});
  for (auto& p : psi_) p.reserve(3 * n);
  double F_left = 0.0, comp = 0.0;  // Neumaier sum of element integrals of f
  for (std::size_t e = 0; e < n; ++e) {
    const double x0 = static_cast<double>(e) * h;
    for (int q = 0; q < 3; ++q) {
      const double x = x0 + kGaussT[q] * h;
      w_.push_back(kGaussW[q] * h);
      abar_.push_back(a.abar()(x));
      for (std::uint32_t j = 1; j <= a.J(); ++j) psi_[j - 1].push_back(a.psi(j)(x));
      F_.push_back(f ? (F_left + comp) + gauss3(*f, x0, x) : 0.0);
    }
    if (f) {
      const double v = gauss3(*f, x0, x0 + h);
      const double t = F_left + v;
      comp += std::abs(F_left) >= std::abs(v) ? (F_left - t) + v : (v - t) + F_left;
      F_left = t;
    }
  }
}

SpatialField NodalSolver::operator()(std::span<const double> y, std::uint32_t k) const {
  if (k > m_) {
    throw Error(ErrorCode::LevelOverflow,
                "level " + std::to_string(k) + " is finer than the quadrature level " + std::to_string(m_));
  }
  if (y.size() > psi_.size()) throw Error(ErrorCode::InvalidArgument, "parameter has more entries than J");
  const std::size_t n = std::size_t{1} << k;
  const std::size_t pts_per_elem = 3 * (std::size_t{1} << (m_ - k));
  std::vector<double> R(n, 0.0), G(n, 0.0);
  for (std::size_t e = 0; e < n; ++e) {
    double r = 0.0, g = 0.0;
    for (std::size_t i = e * pts_per_elem; i < (e + 1) * pts_per_elem; ++i) {
      double av = abar_[i];
      for (std::size_t j = 0; j < y.size(); ++j) av += y[j] * psi_[j][i];
      if (!(av > 0.0)) throw Error(ErrorCode::EllipticityViolation, "a(x, y) is not positive");
      r += w_[i] / av;
      g += w_[i] * F_[i] / av;
    }
    R[e] = r;
    G[e] = g;
  }
  double sr = 0.0, sg = 0.0;
  for (std::size_t e = 0; e < n; ++e) {
    sr += R[e];
    sg += G[e];
  }
  const double q0 = sg / sr;
  std::vector<double> out(n - 1);
  double u = 0.0;
  for (std::size_t e = 0; e + 1 < n; ++e) {
    u += q0 * R[e] - G[e];
    out[e] = u;
  }
  return SpatialField(k, std::move(out));
}

}  // namespace collective
