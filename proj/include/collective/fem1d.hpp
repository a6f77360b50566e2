#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace collective {

/// Finest admissible mesh level.
inline constexpr std::uint32_t kMaxLevel = 24;
/// Level of the "exact" reference solutions.
inline constexpr std::uint32_t kReferenceLevel = 13;
/// Element integrals on meshes coarser than this are accumulated from it.
inline constexpr std::uint32_t kQuadratureBaseLevel = 12;

/// A smooth function on D = (0,1) together with its derivative.
///
/// Element integrals against P1 hats are cached per level. Coarse levels sum
/// the 3-point Gauss integrals of the level-kQuadratureBaseLevel mesh so that
/// stiffness matrices of nested meshes are exactly nested as well.
class SpatialFunction {
 public:
  using Fn = std::function<double(double)>;

  SpatialFunction(Fn value, Fn derivative, std::string name);

  static std::shared_ptr<const SpatialFunction> constant(double c);

  double operator()(double x) const { return value_(x); }
  double derivative(double x) const { return derivative_(x); }
  const std::string& name() const noexcept { return name_; }

  /// int over element e of g, e = 0 .. 2^k - 1.
  const std::vector<double>& element_integrals(std::uint32_t k) const;
  /// (int_e g phi_left, int_e g phi_right) for each element.
  const std::vector<std::array<double, 2>>& element_moments(std::uint32_t k) const;

 private:
  struct LevelData {
    bool ready = false;
    std::vector<double> integrals;
    std::vector<std::array<double, 2>> moments;
  };
  const LevelData& level_data(std::uint32_t k) const;

  Fn value_, derivative_;
  std::string name_;
  mutable std::mutex mutex_;
  mutable std::vector<std::unique_ptr<LevelData>> levels_;
};

using FunctionPtr = std::shared_ptr<const SpatialFunction>;

/// Interior nodal values of a P1 function on the uniform mesh with 2^level cells.
struct SpatialField {
  std::uint32_t level = 0;
  std::vector<double> values;  ///< 2^level - 1 entries

  SpatialField() = default;
  SpatialField(std::uint32_t k, std::vector<double> v);
  static SpatialField zero(std::uint32_t k);

  std::size_t dim() const noexcept { return values.size(); }
  SpatialField& axpy(double a, const SpatialField& x);  ///< this += a x, same level
  SpatialField& scale(double a);

  friend bool operator==(const SpatialField&, const SpatialField&) = default;
};

std::size_t interior_nodes(std::uint32_t k);
/// Throws LevelOverflow when k exceeds kMaxLevel.
void check_level(std::uint32_t k);

/// v -> int f v - sum_t weight_t int psi_t grad w_t . grad v.
struct FluxFunctional {
  struct Term {
    double weight;
    FunctionPtr psi;
    const SpatialField* w;
  };
  FunctionPtr f;  ///< may be null (no load)
  std::vector<Term> flux_terms;
};

/// Load vector of the functional on level k. Flux terms whose field lives on a
/// finer level are assembled there and restricted; coarser fields are prolonged.
std::vector<double> assemble_rhs(const FluxFunctional& rhs, std::uint32_t k);

/// Stiffness matrix-vector product K_c w on level w.level for element integrals m of c.
std::vector<double> stiffness_apply(std::span<const double> elem, const SpatialField& w);

/// Solves the tridiagonal system with element integrals m (length 2^k) and load vector.
SpatialField solve_elements(std::span<const double> elem, std::span<const double> load, std::uint32_t k);

/// Galerkin solution in V_{2^k} of int a0 grad u grad v = rhs(v).
SpatialField solve(const SpatialFunction& a0, const FluxFunctional& rhs, std::uint32_t k);

/// H^1_0-orthogonal (Ritz) projection of v onto level k <= v.level. In one
/// dimension it coincides with nodal interpolation.
SpatialField project(const SpatialField& v, std::uint32_t k);

/// delta_k(v) = P_k v - P_{k-1} v, represented on level k; delta_0 lives on the zero space.
SpatialField detail(const SpatialField& v, std::uint32_t k);

/// Exact injection into the finer level k >= v.level.
SpatialField prolong(const SpatialField& v, std::uint32_t k);

/// Transpose of prolongation: maps a load vector on level r.level' to level k.
std::vector<double> restrict_dual(std::span<const double> load, std::uint32_t from, std::uint32_t to);

/// a + b, represented on the finer of the two levels.
SpatialField add(const SpatialField& a, const SpatialField& b);
/// a - b, represented on the finer of the two levels.
SpatialField subtract(const SpatialField& a, const SpatialField& b);

double v_norm(const SpatialField& v);
double l2_norm(const SpatialField& v);
/// ||a - b||_V on the finer level.
double v_distance(const SpatialField& a, const SpatialField& b);

/// Energy product int c grad u grad v with the element integrals of c.
double energy_product(std::span<const double> elem, const SpatialField& u, const SpatialField& v);

/// Writes "x,value" rows including both boundary zeros.
void write_csv(std::ostream& out, const SpatialField& v);

}  // namespace collective
