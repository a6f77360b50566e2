#include "collective/fem1d.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "collective/error.hpp"

namespace collective {

namespace {

double mesh_width(std::uint32_t k) { return std::ldexp(1.0, -static_cast<int>(k)); }

/// Neumaier summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Nodal values including the two boundary zeros.
std::vector<double> with_boundary(const SpatialField& v) {
  std::vector<double> w(v.values.size() + 2, 0.0);
  std::copy(v.values.begin(), v.values.end(), w.begin() + 1);
  return w;
}

std::vector<double> prolong_once(const std::vector<double>& coarse) {
  const std::size_t nc = coarse.size() + 1;  // coarse cells
  std::vector<double> fine(2 * nc - 1, 0.0);
  for (std::size_t i = 1; i < nc; ++i) fine[2 * i - 1] = coarse[i - 1];
  for (std::size_t i = 0; i < nc; ++i) {
    double left = i == 0 ? 0.0 : coarse[i - 1];
    double right = i + 1 == nc ? 0.0 : coarse[i];
    fine[2 * i] = 0.5 * (left + right);
  }
  return fine;
}

std::vector<double> restrict_once(const std::vector<double>& fine) {
  const std::size_t nf = fine.size() + 1;  // fine cells
  const std::size_t nc = nf / 2;
  std::vector<double> coarse(nc - 1, 0.0);
  for (std::size_t i = 1; i < nc; ++i) {
    // Fine node j has vector index j - 1; coarse node i sits at fine node 2i.
    coarse[i - 1] = fine[2 * i - 1] + 0.5 * (fine[2 * i - 2] + fine[2 * i]);
  }
  return coarse;
}

}  // namespace

SpatialFunction::SpatialFunction(Fn value, Fn derivative, std::string name)
    : value_(std::move(value)), derivative_(std::move(derivative)), name_(std::move(name)) {}

std::shared_ptr<const SpatialFunction> SpatialFunction::constant(double c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "const(%.17g)", c);
  return std::make_shared<const SpatialFunction>([c](double) { return c; }, [](double) { return 0.0; }, buf);
}

const SpatialFunction::LevelData& SpatialFunction::level_data(std::uint32_t k) const {
  check_level(k);
  std::unique_lock<std::mutex> lock(mutex_);
  if (levels_.size() <= k) levels_.resize(k + 1);
  if (!levels_[k]) levels_[k] = std::make_unique<LevelData>();
  LevelData& data = *levels_[k];
  if (data.ready) return data;
  const std::size_t n = std::size_t{1} << k;
  data.integrals.assign(n, 0.0);
  data.moments.assign(n, {0.0, 0.0});
  if (k >= kQuadratureBaseLevel) {
    static const double gx = std::sqrt(0.6);
    static const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    static const double gt[3] = {-gx, 0.0, gx};
    const double h = mesh_width(k);
    for (std::size_t e = 0; e < n; ++e) {
      const double x0 = static_cast<double>(e) * h;
      for (int q = 0; q < 3; ++q) {
        const double t = 0.5 * (1.0 + gt[q]);  // local coordinate in [0,1]
        const double g = value_(x0 + t * h) * gw[q] * h;
        data.integrals[e] += g;
        data.moments[e][0] += g * (1.0 - t);
        data.moments[e][1] += g * t;
      }
    }
  } else {
    lock.unlock();
    const LevelData& fine = level_data(k + 1);
    lock.lock();
    if (data.ready) return data;
    for (std::size_t e = 0; e < n; ++e) {
      const auto& a = fine.moments[2 * e];
      const auto& b = fine.moments[2 * e + 1];
      data.integrals[e] = fine.integrals[2 * e] + fine.integrals[2 * e + 1];
      data.moments[e][0] = a[0] + 0.5 * a[1] + 0.5 * b[0];
      data.moments[e][1] = 0.5 * a[1] + 0.5 * b[0] + b[1];
    }
  }
  data.ready = true;
  return data;
}

const std::vector<double>& SpatialFunction::element_integrals(std::uint32_t k) const {
  return level_data(k).integrals;
}

const std::vector<std::array<double, 2>>& SpatialFunction::element_moments(std::uint32_t k) const {
  return level_data(k).moments;
}

SpatialField::SpatialField(std::uint32_t k, std::vector<double> v) : level(k), values(std::move(v)) {
  if (values.size() != interior_nodes(k)) {
    throw Error(ErrorCode::InvalidArgument, "field on level " + std::to_string(k) + " needs " +
                                                std::to_string(interior_nodes(k)) + " values");
  }
}

SpatialField SpatialField::zero(std::uint32_t k) {
  check_level(k);
  return SpatialField(k, std::vector<double>(interior_nodes(k), 0.0));
}

SpatialField& SpatialField::axpy(double a, const SpatialField& x) {
  if (x.level != level) throw Error(ErrorCode::InvalidArgument, "axpy on different levels");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += a * x.values[i];
  return *this;
}

SpatialField& SpatialField::scale(double a) {
  for (double& v : values) v *= a;
  return *this;
}

std::size_t interior_nodes(std::uint32_t k) { return (std::size_t{1} << k) - 1; }

void check_level(std::uint32_t k) {
  if (k > kMaxLevel) {
    throw Error(ErrorCode::LevelOverflow, "level " + std::to_string(k) + " exceeds " + std::to_string(kMaxLevel));
  }
}

std::vector<double> stiffness_apply(std::span<const double> elem, const SpatialField& w) {
  const std::size_t n = std::size_t{1} << w.level;
  if (elem.size() != n) throw Error(ErrorCode::InvalidArgument, "element data does not match the field level");
  const double inv_h2 = 1.0 / (mesh_width(w.level) * mesh_width(w.level));
  const auto W = with_boundary(w);
  std::vector<double> out(n - 1, 0.0);
  double g_prev = 0.0;
  for (std::size_t e = 0; e < n; ++e) {
    const double g = elem[e] * inv_h2 * (W[e + 1] - W[e]);
    if (e >= 1) out[e - 1] = g_prev - g;
    g_prev = g;
  }
  return out;
}

std::vector<double> restrict_dual(std::span<const double> load, std::uint32_t from, std::uint32_t to) {
  if (to > from) throw Error(ErrorCode::LevelOverflow, "restriction must go to a coarser level");
  if (load.size() != interior_nodes(from)) throw Error(ErrorCode::InvalidArgument, "load size does not match level");
  std::vector<double> out(load.begin(), load.end());
  for (std::uint32_t k = from; k > to; --k) out = restrict_once(out);
  return out;
}

std::vector<double> assemble_rhs(const FluxFunctional& rhs, std::uint32_t k) {
  check_level(k);
  std::vector<double> load(interior_nodes(k), 0.0);
  if (rhs.f) {
    const auto& mom = rhs.f->element_moments(k);
    for (std::size_t i = 1; i < mom.size(); ++i) load[i - 1] = mom[i - 1][1] + mom[i][0];
  }
  for (const auto& term : rhs.flux_terms) {
    if (!term.w || !term.psi) throw Error(ErrorCode::InvalidArgument, "incomplete flux term");
    std::vector<double> r;
    if (term.w->level <= k) {
      SpatialField wk = prolong(*term.w, k);
      r = stiffness_apply(term.psi->element_integrals(k), wk);
    } else {
      auto fine = stiffness_apply(term.psi->element_integrals(term.w->level), *term.w);
      r = restrict_dual(fine, term.w->level, k);
    }
    for (std::size_t i = 0; i < load.size(); ++i) load[i] -= term.weight * r[i];
  }
  return load;
}

SpatialField solve_elements(std::span<const double> elem, std::span<const double> load, std::uint32_t k) {
  check_level(k);
  const std::size_t n = std::size_t{1} << k;
  if (elem.size() != n || load.size() != n - 1) {
    throw Error(ErrorCode::InvalidArgument, "system size does not match level " + std::to_string(k));
  }
  const std::size_t m = n - 1;
  if (m == 0) return SpatialField::zero(k);
  const double h2 = mesh_width(k) * mesh_width(k);
  // Flux form: q_e = (m_e/h^2)(U_{e+1} - U_e), q_{i-1} - q_i = load_i, so
  // q_e = q_0 - B_e with B_e = load_1 + ... + load_e, and sum_e q_e h^2/m_e = 0
  // fixes q_0. Only cumulative sums are formed, so rounding does not grow with 2^k.
  std::vector<double> rho(n), B(n);
  CompensatedSum cum, rho_sum, rho_b_sum;
  for (std::size_t e = 0; e < n; ++e) {
    if (!(elem[e] > 0.0) || !std::isfinite(elem[e])) {
      throw Error(ErrorCode::SingularSystem, "coefficient is not positive on element " + std::to_string(e));
    }
    if (e > 0) cum.add(load[e - 1]);
    B[e] = cum.value();
    rho[e] = h2 / elem[e];
    rho_sum.add(rho[e]);
    rho_b_sum.add(rho[e] * B[e]);
  }
  const double q0 = rho_b_sum.value() / rho_sum.value();
  std::vector<double> x(m);
  CompensatedSum u;
  for (std::size_t e = 0; e < m; ++e) {
    u.add(rho[e] * q0);
    u.add(-rho[e] * B[e]);
    x[e] = u.value();
  }
  return SpatialField(k, std::move(x));
}

SpatialField solve(const SpatialFunction& a0, const FluxFunctional& rhs, std::uint32_t k) {
  auto load = assemble_rhs(rhs, k);
  return solve_elements(a0.element_integrals(k), load, k);
}

SpatialField project(const SpatialField& v, std::uint32_t k) {
  if (k > v.level) {
    throw Error(ErrorCode::LevelOverflow, "cannot project level " + std::to_string(v.level) + " onto finer level " +
                                              std::to_string(k));
  }
  if (k == v.level) return v;
  const std::size_t stride = std::size_t{1} << (v.level - k);
  std::vector<double> out(interior_nodes(k));
  for (std::size_t i = 1; i <= out.size(); ++i) out[i - 1] = v.values[i * stride - 1];
  return SpatialField(k, std::move(out));
}

SpatialField prolong(const SpatialField& v, std::uint32_t k) {
  if (k < v.level) {
    throw Error(ErrorCode::LevelOverflow, "cannot prolong level " + std::to_string(v.level) + " to coarser level " +
                                              std::to_string(k));
  }
  check_level(k);
  std::vector<double> out = v.values;
  for (std::uint32_t l = v.level; l < k; ++l) out = prolong_once(out);
  return SpatialField(k, std::move(out));
}

SpatialField detail(const SpatialField& v, std::uint32_t k) {
  if (k > v.level) throw Error(ErrorCode::LevelOverflow, "detail level exceeds field level");
  if (k == 0) return SpatialField::zero(0);
  SpatialField fine = project(v, k);
  fine.axpy(-1.0, prolong(project(v, k - 1), k));
  return fine;
}

SpatialField add(const SpatialField& a, const SpatialField& b) {
  const std::uint32_t k = std::max(a.level, b.level);
  SpatialField out = prolong(a, k);
  out.axpy(1.0, b.level == k ? b : prolong(b, k));
  return out;
}

SpatialField subtract(const SpatialField& a, const SpatialField& b) {
  const std::uint32_t k = std::max(a.level, b.level);
  SpatialField out = prolong(a, k);
  out.axpy(-1.0, b.level == k ? b : prolong(b, k));
  return out;
}

double v_norm(const SpatialField& v) {
  const double h = mesh_width(v.level);
  const auto W = with_boundary(v);
  double sum = 0.0;
  for (std::size_t e = 0; e + 1 < W.size(); ++e) {
    const double dw = W[e + 1] - W[e];
    sum += dw * dw;
  }
  return std::sqrt(sum / h);
}

double l2_norm(const SpatialField& v) {
  const double h = mesh_width(v.level);
  const auto W = with_boundary(v);
  double sum = 0.0;
  for (std::size_t e = 0; e + 1 < W.size(); ++e) sum += W[e] * W[e] + W[e] * W[e + 1] + W[e + 1] * W[e + 1];
  return std::sqrt(sum * h / 3.0);
}

double v_distance(const SpatialField& a, const SpatialField& b) { return v_norm(subtract(a, b)); }

double energy_product(std::span<const double> elem, const SpatialField& u, const SpatialField& v) {
  if (u.level != v.level || elem.size() != (std::size_t{1} << u.level)) {
    throw Error(ErrorCode::InvalidArgument, "energy product needs matching levels");
  }
  const double inv_h2 = 1.0 / (mesh_width(u.level) * mesh_width(u.level));
  const auto U = with_boundary(u), V = with_boundary(v);
  double sum = 0.0;
  for (std::size_t e = 0; e < elem.size(); ++e) sum += elem[e] * inv_h2 * (U[e + 1] - U[e]) * (V[e + 1] - V[e]);
  return sum;
}

void write_csv(std::ostream& out, const SpatialField& v) {
  const auto W = with_boundary(v);
  const double h = mesh_width(v.level);
  out << "x,value\n";
  char buf[96];
  for (std::size_t i = 0; i < W.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", static_cast<double>(i) * h, W[i]);
    out << buf;
  }
}

}  // namespace collective
