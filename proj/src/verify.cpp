#include "collective/verify.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "json.hpp"

#include "collective/error.hpp"
#include "collective/taylor.hpp"
#include "parallel.hpp"

namespace collective {

SpatialField reference_solution(const AffineDiffusion& a, const FunctionPtr& f, std::span<const double> y,
                                std::uint32_t level) {
  check_parameter(y, 0);
  check_level(level);
  auto elem = a.element_integrals(y, level);
  auto load = assemble_rhs(FluxFunctional{f, {}}, level);
  return solve_elements(elem, load, level);
}

namespace {

void fill_references(SampleSet& set, const AffineDiffusion& a, const FunctionPtr& f, unsigned jobs,
                     std::uint32_t level) {
  check_level(level);
  set.references.resize(set.points.size());
  internal::parallel_for(set.points.size(), jobs,
                         [&](std::size_t i) { set.references[i] = reference_solution(a, f, set.points[i], level); });
}

}  // namespace

SampleSet linf_samples(const AffineDiffusion& a, const FunctionPtr& f, const SamplerSpec& spec, unsigned jobs) {
  SampleSet set;
  set.J = a.J();
  set.seed = spec.seed;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::bernoulli_distribution coin;
  const std::uint32_t cd = std::min(set.J, spec.corner_dims);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cd); ++mask) {
    std::vector<double> y(set.J);
    for (std::uint32_t j = 0; j < set.J; ++j) {
      const bool plus = j < cd ? ((mask >> j) & 1u) == 0 : coin(rng);
      y[j] = plus ? 1.0 : -1.0;
    }
    set.points.push_back(std::move(y));
  }
  for (std::size_t d = 0; d < spec.draws; ++d) {
    std::vector<double> y(set.J);
    for (double& v : y) v = unif(rng);
    set.points.push_back(std::move(y));
  }
  fill_references(set, a, f, jobs, spec.level);
  return set;
}

SampleSet mc_samples(const AffineDiffusion& a, const FunctionPtr& f, std::size_t draws, std::uint64_t seed,
                     unsigned jobs, std::uint32_t level) {
  SampleSet set;
  set.J = a.J();
  set.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (std::size_t d = 0; d < draws; ++d) {
    std::vector<double> y(set.J);
    for (double& v : y) v = unif(rng);
    set.points.push_back(std::move(y));
  }
  fill_references(set, a, f, jobs, level);
  return set;
}

namespace {

std::vector<double> sample_errors(const SampleSet& samples, const Evaluator& S, unsigned jobs) {
  std::vector<double> err(samples.points.size());
  internal::parallel_for(err.size(), jobs, [&](std::size_t i) {
    err[i] = v_distance(samples.references[i], S(samples.points[i]));
  });
  return err;
}

}  // namespace

LinfError error_linf(const SampleSet& samples, const Evaluator& S, unsigned jobs) {
  auto err = sample_errors(samples, S, jobs);
  LinfError out;
  if (err.empty()) return out;
  auto it = std::max_element(err.begin(), err.end());
  out.value = *it;
  out.argmax = samples.points[static_cast<std::size_t>(it - err.begin())];
  return out;
}

L2Error error_l2mu(const SampleSet& samples, const Evaluator& S, std::size_t batches, unsigned jobs) {
  if (batches < 2) throw Error(ErrorCode::InvalidArgument, "batch means need at least 2 batches");
  auto err = sample_errors(samples, S, jobs);
  if (err.size() < batches) throw Error(ErrorCode::InvalidArgument, "fewer draws than batches");
  const std::size_t per = err.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) means[b] += err[i] * err[i];
    means[b] /= static_cast<double>(per);
  }
  double m = 0.0;
  for (double e : err) m += e * e;
  m /= static_cast<double>(err.size());
  double var = 0.0;
  double mb = 0.0;
  for (double v : means) mb += v;
  mb /= static_cast<double>(batches);
  for (double v : means) var += (v - mb) * (v - mb);
  var /= static_cast<double>(batches - 1);
  const double se_sq = std::sqrt(var / static_cast<double>(batches));
  L2Error out;
  out.value = std::sqrt(m);
  // Delta method for the square root.
  out.std_err = out.value > 0.0 ? se_sq / (2.0 * out.value) : 0.0;
  return out;
}

namespace {

struct StencilPoint {
  int offset;  ///< multiple of h
  double weight;  ///< coefficient times h^m
};

std::vector<StencilPoint> central_stencil(std::uint32_t m) {
  switch (m) {
    case 0: return {{0, 1.0}};
    case 1: return {{1, 0.5}, {-1, -0.5}};
    case 2: return {{1, 1.0}, {0, -2.0}, {-1, 1.0}};
    case 3: return {{2, 0.5}, {1, -1.0}, {-1, 1.0}, {-2, -0.5}};
    default: throw Error(ErrorCode::InvalidArgument, "finite-difference order above 3");
  }
}

SpatialField mixed_difference(const AffineDiffusion& a, const FunctionPtr& f, const MultiIndex& s,
                              std::uint32_t level, double h) {
  const std::uint32_t J = std::max(a.J(), s.max_dim());
  std::vector<std::vector<StencilPoint>> stencils;
  std::vector<std::uint32_t> dims;
  for (const auto& e : s.entries()) {
    stencils.push_back(central_stencil(e.exp));
    dims.push_back(e.dim);
  }
  SpatialField out = SpatialField::zero(level);
  std::vector<std::size_t> pos(stencils.size(), 0);
  const double scale = std::pow(h, -static_cast<double>(s.order()));
  while (true) {
    std::vector<double> y(J, 0.0);
    double w = scale;
    for (std::size_t i = 0; i < stencils.size(); ++i) {
      y[dims[i] - 1] = stencils[i][pos[i]].offset * h;
      w *= stencils[i][pos[i]].weight;
    }
    out.axpy(w, reference_solution(a, f, y, level));
    std::size_t i = 0;
    for (; i < pos.size(); ++i) {
      if (++pos[i] < stencils[i].size()) break;
      pos[i] = 0;
    }
    if (i == pos.size()) break;
  }
  return out;
}

}  // namespace

SpatialField fd_taylor_oracle(const AffineDiffusion& a, const FunctionPtr& f, const MultiIndex& s,
                              std::uint32_t level, double h) {
  if (s.order() > 3) throw Error(ErrorCode::InvalidArgument, "finite-difference oracle supports |s| <= 3");
  if (s.max_dim() > a.J()) throw Error(ErrorCode::InvalidArgument, "index uses a dimension beyond J");
  if (!(h > 0.0 && 2.0 * h <= 1.0)) throw Error(ErrorCode::InvalidArgument, "step must lie in (0, 1/2]");
  if (s.is_zero()) return reference_solution(a, f, {}, level);
  auto coarse = mixed_difference(a, f, s, level, h);
  auto fine = mixed_difference(a, f, s, level, h / 2.0);
  fine.scale(4.0 / 3.0).axpy(-1.0 / 3.0, coarse);
  return fine.scale(1.0 / factorial_product(s));
}

RateFit rate_fit(std::span<const double> budgets, std::span<const double> errors) {
  if (budgets.size() != errors.size()) throw Error(ErrorCode::InvalidArgument, "budgets and errors differ in length");
  if (budgets.size() < 5) throw Error(ErrorCode::DegenerateFit, "rate fit needs at least 5 points");
  const std::size_t n = budgets.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i])) {
      throw Error(ErrorCode::DegenerateFit, "error at n = " + std::to_string(budgets[i]) + " is not positive");
    }
    if (!(budgets[i] > 0.0)) throw Error(ErrorCode::DegenerateFit, "budgets must be positive");
    x[i] = std::log(budgets[i]);
    y[i] = std::log(errors[i]);
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::DegenerateFit, "budgets are all equal");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  const double dof = static_cast<double>(n - 2);
  boost::math::students_t dist(dof);
  fit.band = boost::math::quantile(dist, 0.975) * std::sqrt(rss / dof / sxx);
  return fit;
}

RateFit ErrorReport::fit() const {
  std::vector<double> n, e;
  for (const auto& r : rows) {
    n.push_back(static_cast<double>(r.n));
    e.push_back(r.error);
  }
  return rate_fit(n, e);
}

void ErrorReport::write_csv(std::ostream& out) const {
  out << "method,n,error,stderr,seed\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,", static_cast<long long>(r.n), r.error, r.std_err);
    out << method << ',' << buf << seed << '\n';
  }
}

void ErrorReport::write_sidecar(std::ostream& out) const {
  nlohmann::json j;
  j["method"] = method;
  j["seed"] = seed;
  j["constants"] = constants;
  try {
    auto f = fit();
    j["fit"] = {{"slope", f.slope}, {"intercept", f.intercept}, {"band95", f.band}};
  } catch (const Error&) {
    j["fit"] = nullptr;
  }
  out << j.dump(2) << '\n';
}

}  // namespace collective
