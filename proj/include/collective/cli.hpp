#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "collective/colloc.hpp"
#include "collective/diffusion.hpp"

namespace collective {

enum class Method { Taylor, Colloc, LegendreLinf, GalerkinL2 };

std::string method_name(Method m);

/// Parsed experiment file. See README for the format.
struct ExperimentConfig {
  std::string abar;  ///< required
  PsiFamily family;
  double load = 1.0;  ///< constant right-hand side f

  Method method = Method::Taylor;
  std::optional<double> p;          ///< nullopt: 1/2 for L-infinity methods, 2/3 for galerkin-l2
  std::string weight = "superposed";  ///< colloc also accepts "split"
  double q = 4.0;                     ///< split-weight exponent
  CollocSampler sampler = CollocSampler::Nodal;

  std::vector<std::int64_t> budgets;
  std::uint32_t k_ref = kReferenceLevel;
  std::uint64_t seed = 20240611;
  std::uint32_t corner_dims = 6;
  std::size_t linf_draws = 136;
  std::size_t mc_draws = 1000;
  std::filesystem::path out = "results";
  bool write_surrogates = false;
  unsigned jobs = 1;

  double resolved_p() const;
};

/// Comma-separated, strictly increasing positive budgets.
std::vector<std::int64_t> parse_budgets(const std::string& text);

/// INI-style "key = value" lines under [model], [method] and [run]. ConfigError on any problem.
ExperimentConfig parse_config(std::istream& in, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Admissibility report for the configured model; returns whether the configured method passes.
bool gates(const ExperimentConfig& config, std::ostream& out);

/// Exit status of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitGate = 2;
inline constexpr int kExitNumerical = 3;

/// Builds and measures one surrogate per budget and writes
///   <out>/<method>.csv, <out>/<method>.json, <out>/audit.csv
/// (plus <out>/cg.csv for galerkin-l2 and <out>/surrogates/n<budget>/ on request).
/// Nothing is written when the gate fails.
int run(const ExperimentConfig& config, std::ostream& log);

}  // namespace collective
