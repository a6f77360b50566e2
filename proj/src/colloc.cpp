#include "collective/colloc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "collective/error.hpp"
#include "collective/nodal.hpp"
#include "collective/verify.hpp"
#include "parallel.hpp"

namespace collective {

namespace {

std::vector<double> compute_leja() {
  constexpr std::size_t N = kLejaGrid;
  constexpr double pi = std::numbers::pi;
  // log|e^{i a} - e^{i b}| = log(2 |sin((a - b)/2)|), tabulated by grid offset.
  std::vector<double> chord(N);
  chord[0] = -INFINITY;
  for (std::size_t d = 1; d < N; ++d) {
    const std::size_t m = std::min(d, N - d);
    chord[d] = std::log(2.0 * std::sin(pi * static_cast<double>(m) / static_cast<double>(N)));
  }
  auto real_part = [&](std::size_t i) {
    const std::size_t m = std::min(i, N - i);  // conjugates share a real part bit for bit
    return std::sin(2.0 * pi * (static_cast<double>(N / 4) - static_cast<double>(m)) / static_cast<double>(N));
  };
  std::vector<double> logsum(N, 0.0);
  std::vector<double> out;
  std::size_t z = 0;  // z_0 = 1
  while (true) {
    const double x = real_part(z);
    if (std::find(out.begin(), out.end(), x) == out.end()) {
      out.push_back(x);
      if (out.size() == kMaxLejaPoints) break;
    }
    for (std::size_t i = 0; i < N; ++i) logsum[i] += chord[(i + N - z) % N];
    double best = -INFINITY;
    for (double v : logsum) best = std::max(best, v);
    // Smallest angle among the (numerically) tied maximizers.
    const double tol = 1e-12 * std::max(1.0, std::abs(best));
    for (std::size_t i = 0; i < N; ++i) {
      if (logsum[i] >= best - tol) {
        z = i;
        break;
      }
    }
  }
  return out;
}

const std::vector<double>& leja_table() {
  static const std::vector<double> table = compute_leja();
  return table;
}

/// h_m(t) for the nodes xi.
double hier_1d(std::uint32_t m, double t, std::span<const double> xi) {
  double h = 1.0;
  for (std::uint32_t i = 0; i < m; ++i) h *= (t - xi[i]) / (xi[m] - xi[i]);
  return h;
}

void require_nodes(std::span<const double> xi, std::uint32_t degree) {
  if (xi.size() <= degree) {
    throw Error(ErrorCode::CountOverflow, "need " + std::to_string(degree + 1) + " interpolation points, have " +
                                              std::to_string(xi.size()));
  }
}

std::uint32_t max_exponent(const std::set<MultiIndex>& members) {
  std::uint32_t m = 0;
  for (const auto& s : members) {
    for (const auto& e : s.entries()) m = std::max(m, e.exp);
  }
  return m;
}

/// All s' <= s other than s itself.
std::vector<MultiIndex> strict_box_below(const MultiIndex& s) {
  std::vector<MultiIndex> out;
  const auto entries = s.entries();
  std::vector<std::uint32_t> e(entries.size(), 0);
  while (true) {
    std::vector<MultiIndex::Entry> cur;
    bool is_s = true;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (e[i] > 0) cur.push_back({entries[i].dim, e[i]});
      is_s = is_s && e[i] == entries[i].exp;
    }
    if (!is_s) out.emplace_back(std::move(cur));
    std::size_t i = 0;
    for (; i < entries.size(); ++i) {
      if (++e[i] <= entries[i].exp) break;
      e[i] = 0;
    }
    if (i == entries.size()) break;
  }
  return out;
}

/// h_{s'}(xi_s) for s' <= s.
double hier_at_node(const MultiIndex& sp, const MultiIndex& s, std::span<const double> xi) {
  double h = 1.0;
  for (const auto& e : sp.entries()) h *= hier_1d(e.exp, xi[s[e.dim]], xi);
  return h;
}

void check_ordering(const DownwardClosedSet& lambda, std::span<const MultiIndex> ordering) {
  if (ordering.size() != lambda.size()) throw Error(ErrorCode::OrderingInvalid, "ordering does not list Lambda");
  std::set<MultiIndex> seen;
  for (const auto& s : ordering) {
    if (!lambda.contains(s) || !seen.insert(s).second) {
      throw Error(ErrorCode::OrderingInvalid, "ordering entry " + s.to_string() + " is not a new member of Lambda");
    }
    for (const auto& e : s.entries()) {
      if (!seen.count(s.decremented(e.dim))) {
        throw Error(ErrorCode::OrderingInvalid, s.to_string() + " precedes its predecessor " +
                                                    s.decremented(e.dim).to_string());
      }
    }
  }
}

template <class Value, class Sampler, class Axpy>
std::map<MultiIndex, Value> surplus_recursion(const Sampler& sampler, const DownwardClosedSet& lambda,
                                              std::span<const MultiIndex> ordering, std::span<const double> xi,
                                              std::uint32_t J, Axpy axpy) {
  check_ordering(lambda, ordering);
  require_nodes(xi, max_exponent(lambda.members()));
  if (lambda.max_dim() > J) throw Error(ErrorCode::InvalidArgument, "Lambda uses a dimension beyond J");
  std::map<MultiIndex, Value> u;
  for (const auto& s : ordering) {
    Value v = sampler(grid_point(s, J, xi));
    for (const auto& sp : strict_box_below(s)) axpy(v, -hier_at_node(sp, s, xi), u.at(sp));
    u.emplace(s, std::move(v));
  }
  return u;
}

}  // namespace

std::vector<double> leja_points(std::size_t n) {
  if (n > kMaxLejaPoints) {
    throw Error(ErrorCode::CountOverflow,
                std::to_string(n) + " Leja points requested, at most " + std::to_string(kMaxLejaPoints));
  }
  const auto& table = leja_table();
  return {table.begin(), table.begin() + static_cast<std::ptrdiff_t>(n)};
}

double lebesgue_univariate(std::uint32_t k, std::span<const double> xi) {
  require_nodes(xi, k);
  std::vector<double> w(k + 1, 1.0);
  for (std::uint32_t j = 0; j <= k; ++j) {
    for (std::uint32_t i = 0; i <= k; ++i) {
      if (i != j) w[j] /= xi[j] - xi[i];
    }
  }
  double best = 0.0;
  for (std::size_t g = 0; g < kLebesgueGrid; ++g) {
    const double t = -1.0 + 2.0 * static_cast<double>(g) / static_cast<double>(kLebesgueGrid - 1);
    double num = 0.0, den = 0.0;
    bool at_node = false;
    for (std::uint32_t j = 0; j <= k; ++j) {
      if (t == xi[j]) {
        at_node = true;
        break;
      }
      const double q = w[j] / (t - xi[j]);
      num += std::abs(q);
      den += q;
    }
    best = std::max(best, at_node ? 1.0 : num / std::abs(den));
  }
  return best;
}

double lebesgue_exponent(std::uint32_t k_max, std::span<const double> xi) {
  double theta = 0.0;
  for (std::uint32_t k = 1; k <= k_max; ++k) {
    theta = std::max(theta, std::log(lebesgue_univariate(k, xi)) / std::log(k + 1.0));
  }
  return theta;
}

double lebesgue_of_set(const DownwardClosedSet& lambda, std::span<const double> xi) {
  if (lambda.empty()) throw Error(ErrorCode::InvalidArgument, "empty index set");
  const auto dims = lambda.active_dims();
  const std::uint32_t J = lambda.max_dim();
  const auto order = lambda.graded_order();
  const std::size_t L = order.size();
  if (dims.empty()) return 1.0;

  // Cardinal functions L_nu = sum_s C[nu][s] h_s from the surpluses of unit data.
  std::vector<std::vector<double>> C(L, std::vector<double>(L, 0.0));
  for (std::size_t nu = 0; nu < L; ++nu) {
    const auto target = grid_point(order[nu], J, xi);
    auto u = surpluses([&](std::span<const double> y) { return std::equal(y.begin(), y.end(), target.begin()) ? 1.0 : 0.0; },
                       lambda, order, xi, J);
    for (std::size_t i = 0; i < L; ++i) C[nu][i] = u.at(order[i]);
  }

  const std::size_t d = dims.size();
  const double budget = std::max(4097.0, 2e8 / static_cast<double>(L * L));
  std::size_t per_axis = d == 1 ? kLebesgueGrid
                                : static_cast<std::size_t>(std::floor(std::pow(budget, 1.0 / static_cast<double>(d))));
  per_axis = std::clamp<std::size_t>(per_axis, 17, kLebesgueGrid);
  std::vector<double> axis(per_axis);
  for (std::size_t g = 0; g < per_axis; ++g) axis[g] = -1.0 + 2.0 * static_cast<double>(g) / static_cast<double>(per_axis - 1);

  const std::uint32_t deg = max_exponent(lambda.members());
  // H[m][g] = h_m(axis[g]).
  std::vector<std::vector<double>> H(deg + 1, std::vector<double>(per_axis));
  for (std::uint32_t m = 0; m <= deg; ++m) {
    for (std::size_t g = 0; g < per_axis; ++g) H[m][g] = hier_1d(m, axis[g], xi);
  }
  std::vector<std::size_t> dim_slot(J + 1, 0);
  for (std::size_t i = 0; i < d; ++i) dim_slot[dims[i]] = i;

  double best = 0.0;
  std::vector<std::size_t> pos(d, 0);
  std::vector<double> hs(L);
  while (true) {
    for (std::size_t i = 0; i < L; ++i) {
      double h = 1.0;
      for (const auto& e : order[i].entries()) h *= H[e.exp][pos[dim_slot[e.dim]]];
      hs[i] = h;
    }
    double sum = 0.0;
    for (std::size_t nu = 0; nu < L; ++nu) {
      double v = 0.0;
      for (std::size_t i = 0; i < L; ++i) v += C[nu][i] * hs[i];
      sum += std::abs(v);
    }
    best = std::max(best, sum);
    std::size_t i = 0;
    for (; i < d; ++i) {
      if (++pos[i] < per_axis) break;
      pos[i] = 0;
    }
    if (i == d) break;
  }
  return best;
}

double hier_basis_eval(const MultiIndex& s, std::span<const double> y, std::span<const double> xi) {
  if (y.size() < s.max_dim()) throw Error(ErrorCode::InvalidArgument, "point has fewer coordinates than s");
  double h = 1.0;
  for (const auto& e : s.entries()) {
    require_nodes(xi, e.exp);
    h *= hier_1d(e.exp, y[e.dim - 1], xi);
  }
  return h;
}

std::vector<double> grid_point(const MultiIndex& s, std::uint32_t J, std::span<const double> xi) {
  if (s.max_dim() > J) throw Error(ErrorCode::InvalidArgument, "index uses a dimension beyond J");
  std::vector<double> y(J, xi[0]);
  for (const auto& e : s.entries()) {
    require_nodes(xi, e.exp);
    y[e.dim - 1] = xi[e.exp];
  }
  return y;
}

std::map<MultiIndex, SpatialField> surpluses(const FieldSampler& sampler, const DownwardClosedSet& lambda,
                                             std::span<const MultiIndex> ordering, std::span<const double> xi,
                                             std::uint32_t J) {
  return surplus_recursion<SpatialField>(sampler, lambda, ordering, xi, J,
                                         [](SpatialField& v, double w, const SpatialField& x) {
                                           if (w == 0.0) return;
                                           if (x.level > v.level) v = prolong(v, x.level);
                                           v.axpy(w, prolong(x, v.level));
                                         });
}

std::map<MultiIndex, double> surpluses(const ScalarSampler& sampler, const DownwardClosedSet& lambda,
                                       std::span<const MultiIndex> ordering, std::span<const double> xi,
                                       std::uint32_t J) {
  return surplus_recursion<double>(sampler, lambda, ordering, xi, J,
                                   [](double& v, double w, double x) { v += w * x; });
}

double interpolate(const std::map<MultiIndex, double>& surplus, std::span<const double> y,
                   std::span<const double> xi) {
  double sum = 0.0;
  for (const auto& [s, u] : surplus) sum += u * hier_basis_eval(s, y, xi);
  return sum;
}

std::uint64_t CollocSurrogate::rank() const {
  std::uint64_t r = 0;
  for (const auto& [key, field] : details) r += std::uint64_t{1} << key.first;
  return r;
}

std::uint32_t CollocSurrogate::max_level() const {
  std::uint32_t m = 0;
  for (const auto& [key, field] : details) m = std::max(m, key.first);
  return m;
}

CollocSurrogate build_colloc_on(const AffineDiffusion& a, const FunctionPtr& f, const CollectiveIndexSet& G,
                                double mass, unsigned jobs, CollocSampler sampler) {
  CollocSurrogate S;
  S.G = G;
  S.mass = mass;
  S.cost_bound = 2.0 * mass * G.T();
  if (G.empty()) return S;

  const auto levels = closure_levels(G);
  std::uint32_t kstar = 0, deg = 0;
  std::vector<std::vector<MultiIndex>> layers;
  for (const auto& [s, k] : levels) {
    kstar = std::max(kstar, k);
    for (const auto& e : s.entries()) deg = std::max(deg, e.exp);
    if (layers.size() <= s.order()) layers.resize(s.order() + 1);
    layers[s.order()].push_back(s);
    S.cost += (std::uint64_t{2} << k) - 1;
  }
  std::size_t pairs = 0;
  for (const auto& [s, k] : levels) pairs += k + 1;
  S.closure_added = pairs - G.size();
  S.sections.assign(kstar + 1, {});
  for (const auto& [s, k] : levels) {
    for (std::uint32_t l = 0; l <= k; ++l) S.sections[l].insert(s);
  }
  if (deg + 1 > kMaxLejaPoints) {
    throw Error(ErrorCode::CountOverflow, "degree " + std::to_string(deg) + " needs more Leja points than supported");
  }
  S.xi = leja_points(deg + 1);
  const std::uint32_t J = a.J();
  std::optional<NodalSolver> nodal;
  if (sampler == CollocSampler::Nodal) nodal.emplace(a, f, std::max(kstar, kReferenceLevel));

  // Surplus u_s on level kappa(s): sample minus the hierarchical interpolant of the
  // earlier surpluses at xi_s. Only s' <= s contribute, and those live on levels >= kappa(s).
  std::map<MultiIndex, SpatialField> u;
  for (const auto& layer : layers) {
    std::vector<SpatialField> out(layer.size());
    internal::parallel_for(layer.size(), jobs, [&](std::size_t i) {
      const MultiIndex& s = layer[i];
      const std::uint32_t k = levels.at(s);
      const auto y = grid_point(s, J, S.xi);
      SpatialField v = nodal ? (*nodal)(y, k) : reference_solution(a, f, y, k);
      for (const auto& sp : strict_box_below(s)) {
        const double w = hier_at_node(sp, s, S.xi);
        if (w != 0.0) v.axpy(-w, project(u.at(sp), k));
      }
      out[i] = std::move(v);
    });
    for (std::size_t i = 0; i < layer.size(); ++i) u.emplace(layer[i], std::move(out[i]));
  }
  for (const auto& [s, k] : levels) {
    for (std::uint32_t l = 0; l <= k; ++l) S.details.emplace(LevelIndex{l, s}, detail(u.at(s), l));
  }
  return S;
}

CollocSurrogate build_colloc(const AffineDiffusion& a, const FunctionPtr& f, std::int64_t n, double p,
                             const WeightRule& weight, const CollocBuildOptions& options) {
  if (weight.kind() == WeightKind::SuperposedFactorial) {
    auto gate = summability_gate(weight.b(), p);
    if (!gate.admissible) throw Error(ErrorCode::InvalidArgument, "summability gate failed: " + gate.reason);
  }
  const double mass = lp_mass(weight, p, options.mass).mass;
  auto G = build_G(weight, p, choose_T(n, p, mass), options.enumeration);
  CollocSurrogate S = build_colloc_on(a, f, G, mass, options.jobs, options.sampler);
  S.budget = n;
  return S;
}

SpatialField evaluate(const CollocSurrogate& S, std::span<const double> y) {
  std::uint32_t dims = 0;
  for (const auto& [key, field] : S.details) dims = std::max(dims, key.second.max_dim());
  check_parameter(y, dims);
  SpatialField out = SpatialField::zero(S.max_level());
  std::map<MultiIndex, double> h;
  for (const auto& [key, field] : S.details) {
    auto it = h.find(key.second);
    if (it == h.end()) it = h.emplace(key.second, hier_basis_eval(key.second, y, S.xi)).first;
    if (it->second == 0.0) continue;
    out.axpy(it->second, prolong(field, out.level));
  }
  return out;
}

}  // namespace collective
