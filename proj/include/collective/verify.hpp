#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "collective/diffusion.hpp"
#include "collective/fem1d.hpp"
#include "collective/multiindex.hpp"

namespace collective {

/// Galerkin solve at `level` with the coefficient a(y) evaluated pointwise.
/// Missing trailing entries of y are zero.
SpatialField reference_solution(const AffineDiffusion& a, const FunctionPtr& f, std::span<const double> y,
                                std::uint32_t level = kReferenceLevel);

using Evaluator = std::function<SpatialField(std::span<const double>)>;

/// Parameter points with their reference solutions, reused across budgets.
struct SampleSet {
  std::uint32_t J = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> points;
  std::vector<SpatialField> references;
};

struct SamplerSpec {
  std::uint64_t seed = 20240611;
  std::uint32_t corner_dims = 6;  ///< corners enumerate the signs of y_1..y_min(J, corner_dims)
  std::size_t draws = 136;  ///< 64 corners + 136 draws = 200 points at J >= 6
  std::uint32_t level = kReferenceLevel;  ///< level of the reference solves
};

/// 2^min(J,6) sign corners (remaining coordinates get seeded random signs) and `draws` uniform points.
SampleSet linf_samples(const AffineDiffusion& a, const FunctionPtr& f, const SamplerSpec& spec = {},
                       unsigned jobs = 1);
/// iid uniform draws on [-1,1]^J.
SampleSet mc_samples(const AffineDiffusion& a, const FunctionPtr& f, std::size_t draws, std::uint64_t seed,
                     unsigned jobs = 1, std::uint32_t level = kReferenceLevel);

struct LinfError {
  double value = 0.0;
  std::vector<double> argmax;
};

/// max over the samples of ||reference(y) - S(y)||_V.
LinfError error_linf(const SampleSet& samples, const Evaluator& S, unsigned jobs = 1);

struct L2Error {
  double value = 0.0;
  double std_err = 0.0;
};

/// Root mean square of the V-norm errors; the standard error comes from batch means.
L2Error error_l2mu(const SampleSet& samples, const Evaluator& S, std::size_t batches = 20, unsigned jobs = 1);

/// (1/s!) d^s u(0) by central differences with one Richardson step, |s| <= 3.
SpatialField fd_taylor_oracle(const AffineDiffusion& a, const FunctionPtr& f, const MultiIndex& s,
                              std::uint32_t level, double h = 1e-3);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double band = 0.0;  ///< half-width of the 95% confidence interval of the slope
};

/// Least squares on (log n, log e). At least 5 pairs with positive errors.
RateFit rate_fit(std::span<const double> budgets, std::span<const double> errors);

struct ErrorReport {
  struct Row {
    std::int64_t n = 0;
    double error = 0.0;
    double std_err = 0.0;
  };
  std::string method;
  std::uint64_t seed = 0;
  std::vector<Row> rows;
  std::map<std::string, double> constants;

  RateFit fit() const;
  /// "method,n,error,stderr,seed".
  void write_csv(std::ostream& out) const;
  /// JSON object with method, seed, constants and the fitted slope.
  void write_sidecar(std::ostream& out) const;
};

}  // namespace collective
