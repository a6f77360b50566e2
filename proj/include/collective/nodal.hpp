#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "collective/diffusion.hpp"
#include "collective/fem1d.hpp"

namespace collective {

/// P_k u(y) for the exact solution of -(a(y) u')' = f on (0,1), u(0) = u(1) = 0.
///
/// With F(x) = int_0^x f the flux is a u' = q0 - F, so
///   u(x) = int_0^x (q0 - F)/a,  q0 = int_0^1 F/a / int_0^1 1/a,
/// and P_k u is the nodal interpolant. Integrals use 3-point Gauss rules on the
/// level-`quad_level` mesh, with abar, psi_j and F tabulated once.
class NodalSolver {
 public:
  NodalSolver(const AffineDiffusion& a, const FunctionPtr& f, std::uint32_t quad_level = kReferenceLevel);

  /// Nodal values of u(y) on level k <= quad_level. Missing trailing entries of y are zero.
  SpatialField operator()(std::span<const double> y, std::uint32_t k) const;

  std::uint32_t quad_level() const noexcept { return m_; }

 private:
  std::uint32_t m_;
  std::vector<double> w_;                 ///< quadrature weights
  std::vector<double> abar_;              ///< abar at the points
  std::vector<std::vector<double>> psi_;  ///< psi_j at the points
  std::vector<double> F_;                 ///< int_0^x f at the points
};

}  // namespace collective
