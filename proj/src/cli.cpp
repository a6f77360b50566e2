#include "collective/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "collective/error.hpp"
#include "collective/legendre.hpp"
#include "collective/surrogate_io.hpp"
#include "collective/taylor.hpp"
#include "collective/verify.hpp"

namespace collective {

namespace fs = std::filesystem;

std::string method_name(Method m) {
  switch (m) {
    case Method::Taylor: return "taylor";
    case Method::Colloc: return "colloc";
    case Method::LegendreLinf: return "legendre-linf";
    case Method::GalerkinL2: return "galerkin-l2";
  }
  return "?";
}

double ExperimentConfig::resolved_p() const {
  if (p) return *p;
  return method == Method::GalerkinL2 ? 2.0 / 3.0 : 0.5;  // alpha = 1
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void config_error(const std::string& origin, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ConfigError, origin + (line ? ":" + std::to_string(line) : std::string()) + ": " + what);
}

double to_double(const std::string& v, const std::string& origin, std::size_t line) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    config_error(origin, line, "expected a number, got '" + v + "'");
  }
}

std::int64_t to_int(const std::string& v, const std::string& origin, std::size_t line) {
  try {
    std::size_t pos = 0;
    long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    config_error(origin, line, "expected an integer, got '" + v + "'");
  }
}

std::uint64_t to_nonneg(const std::string& v, const std::string& origin, std::size_t line) {
  const auto d = to_int(v, origin, line);
  if (d < 0) config_error(origin, line, "expected a nonnegative integer, got '" + v + "'");
  return static_cast<std::uint64_t>(d);
}

bool to_bool(const std::string& v, const std::string& origin, std::size_t line) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  config_error(origin, line, "expected true or false, got '" + v + "'");
}

}  // namespace

std::vector<std::int64_t> parse_budgets(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(to_int(item, "budgets", 0));
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "budgets: empty list");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 1) throw Error(ErrorCode::ConfigError, "budgets: " + std::to_string(out[i]) + " is not positive");
    if (i > 0 && out[i] <= out[i - 1]) throw Error(ErrorCode::ConfigError, "budgets: not strictly increasing");
  }
  return out;
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  ExperimentConfig c;
  bool have_method = false, have_budgets = false;
  std::string section, raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(origin, lineno, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "method" && section != "run") {
        config_error(origin, lineno, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(origin, lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    if (section.empty()) config_error(origin, lineno, "key '" + key + "' outside a section");
    const std::string full = section + "." + key;

    if (full == "model.abar") c.abar = v;
    else if (full == "model.J") c.family.count = static_cast<std::uint32_t>(to_nonneg(v, origin, lineno));
    else if (full == "model.amplitude") c.family.amplitude = to_double(v, origin, lineno);
    else if (full == "model.decay") c.family.decay = to_double(v, origin, lineno);
    else if (full == "model.shape") c.family.shape = v;
    else if (full == "model.load") c.load = to_double(v, origin, lineno);
    else if (full == "method.name") {
      have_method = true;
      if (v == "taylor") c.method = Method::Taylor;
      else if (v == "colloc") c.method = Method::Colloc;
      else if (v == "legendre-linf") c.method = Method::LegendreLinf;
      else if (v == "galerkin-l2") c.method = Method::GalerkinL2;
      else config_error(origin, lineno, "unknown method '" + v + "'");
    } else if (full == "method.p") {
      if (v == "auto") c.p.reset();
      else c.p = to_double(v, origin, lineno);
    } else if (full == "method.weight") {
      if (v != "superposed" && v != "split") config_error(origin, lineno, "weight must be superposed or split");
      c.weight = v;
    } else if (full == "method.q") c.q = to_double(v, origin, lineno);
    else if (full == "method.sampler") {
      if (v == "nodal") c.sampler = CollocSampler::Nodal;
      else if (v == "galerkin") c.sampler = CollocSampler::Galerkin;
      else config_error(origin, lineno, "sampler must be nodal or galerkin");
    } else if (full == "run.budgets") {
      try {
        c.budgets = parse_budgets(v);
      } catch (const Error& e) {
        config_error(origin, lineno, e.what());
      }
      have_budgets = true;
    } else if (full == "run.k_ref") c.k_ref = static_cast<std::uint32_t>(to_nonneg(v, origin, lineno));
    else if (full == "run.seed") c.seed = to_nonneg(v, origin, lineno);
    else if (full == "run.corner_dims") c.corner_dims = static_cast<std::uint32_t>(to_nonneg(v, origin, lineno));
    else if (full == "run.linf_draws") c.linf_draws = to_nonneg(v, origin, lineno);
    else if (full == "run.mc_draws") c.mc_draws = to_nonneg(v, origin, lineno);
    else if (full == "run.out") c.out = v;
    else if (full == "run.write_surrogates") c.write_surrogates = to_bool(v, origin, lineno);
    else if (full == "run.jobs") c.jobs = static_cast<unsigned>(std::max<std::uint64_t>(1, to_nonneg(v, origin, lineno)));
    else config_error(origin, lineno, "unknown key '" + full + "'");
  }
  if (c.abar.empty()) config_error(origin, 0, "missing model preset (model.abar)");
  if (!have_method) config_error(origin, 0, "missing method.name");
  if (!have_budgets) config_error(origin, 0, "missing run.budgets");
  const double p = c.resolved_p();
  if (c.method == Method::GalerkinL2) {
    if (!(p > 0.0 && p < 2.0)) config_error(origin, 0, "p must lie in (0,2) for galerkin-l2");
  } else if (!(p > 0.0 && p <= 1.0)) {
    config_error(origin, 0, "p must lie in (0,1] for " + method_name(c.method));
  }
  if (c.weight == "split" && c.method != Method::Colloc) config_error(origin, 0, "the split weight is for colloc only");
  if (c.method == Method::GalerkinL2 && c.mc_draws < 1000) config_error(origin, 0, "mc_draws must be at least 1000");
  if (c.k_ref > kMaxLevel) config_error(origin, 0, "k_ref exceeds " + std::to_string(kMaxLevel));
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  return parse_config(in, path.string());
}

namespace {

struct Context {
  AffineDiffusion a;
  FunctionPtr f;
  Ellipticity ell;
  RegularityConstants rc;
};

Context make_context(const ExperimentConfig& c) {
  // Unknown presets and shapes surface as ConfigError from the model factory.
  AffineDiffusion a = AffineDiffusion::from_preset(c.abar, c.family);
  auto f = SpatialFunction::constant(c.load);
  auto ell = ellipticity_bounds(a);
  if (!(ell.r > 0.0)) {
    throw Error(ErrorCode::EllipticityViolation, "min_x (abar - sum |psi_j|) = " + std::to_string(ell.r) + " <= 0");
  }
  auto rc = regularity_constants(a, std::abs(c.load));
  return {std::move(a), std::move(f), ell, std::move(rc)};
}

double l1(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.6g", i ? ", " : "", v[i]);
    s += buf;
  }
  return "[" + s + "]";
}

WeightRule method_weight(const ExperimentConfig& c, const Context& ctx) {
  if (c.method == Method::GalerkinL2) return superposed_weight(ctx.rc.d);
  if (c.method == Method::Colloc && c.weight == "split") return colloc_weight(ctx.a, c.q, ctx.ell.r);
  return superposed_weight(ctx.rc.b);
}

}  // namespace

bool gates(const ExperimentConfig& c, std::ostream& out) {
  Context ctx = make_context(c);
  const double p = c.resolved_p();
  char buf[256];
  std::snprintf(buf, sizeof buf, "r = %.6g\nR = %.6g\nK = %.6g\n", ctx.ell.r, ctx.ell.R, ctx.rc.K);
  out << buf;
  out << "b = " << list(ctx.rc.b) << "\nd = " << list(ctx.rc.d) << '\n';
  const double bl1 = l1(ctx.rc.b), dl1 = l1(ctx.rc.d);
  std::snprintf(buf, sizeof buf, "||b||_1 = %.6g (margin %.6g)\n||d||_1 = %.6g (margin %.6g)\n", bl1, 1.0 - bl1, dl1,
                1.0 - dl1);
  out << buf;

  auto b_gate = summability_gate(ctx.rc.b, 0.5);
  auto d_gate = summability_gate(ctx.rc.d, 2.0 / 3.0);
  auto line = [&](const std::string& name, const GateResult& g) {
    out << name << ": " << (g.admissible ? "pass" : "FAIL") << (g.admissible ? "" : " (" + g.reason + ")") << '\n';
  };
  line("taylor / legendre-linf gate ||b||_1 < 1", b_gate);
  line("colloc gate ||b||_1 < 1", b_gate);
  line("galerkin-l2 gate ||d||_1 < 1", d_gate);
  if (c.method == Method::Colloc && c.weight == "split") {
    try {
      auto info = colloc_weight_info(ctx.a, c.q, ctx.ell.r);
      std::snprintf(buf, sizeof buf, "split weight: j0 = %u, lambda = %.6g, mass(p=%.4g) = %.6g\n", info.j0, info.lambda,
                    p, lp_mass(info.rule, p).mass);
      out << buf;
    } catch (const Error& e) {
      out << "split weight: FAIL (" << e.what() << ")\n";
      return false;
    }
  }

  auto own = summability_gate(c.method == Method::GalerkinL2 ? ctx.rc.d : ctx.rc.b, p);
  if (own.admissible) {
    auto mass = lp_mass(method_weight(c, ctx), p);
    std::snprintf(buf, sizeof buf, "lp_mass(%s, p=%.4g) = %.6g%s\n", method_name(c.method).c_str(), p, mass.mass,
                  mass.certified ? "" : " (tail not certified)");
    out << buf;
  }
  out << "configured method " << method_name(c.method) << ": " << (own.admissible ? "pass" : "FAIL")
      << (own.admissible ? "" : " (" + own.reason + ")") << '\n';
  return own.admissible;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + p.string());
}

}  // namespace

int run(const ExperimentConfig& c, std::ostream& log) {
  std::ostringstream gate_text;
  bool ok = false;
  try {
    ok = gates(c, gate_text);
  } catch (const Error& e) {
    log << "gate failure: " << e.what() << '\n';
    return kExitGate;
  }
  if (!ok) {
    log << gate_text.str() << "gate failure: no artifacts written\n";
    return kExitGate;
  }
  try {
    Context ctx = make_context(c);
    const double p = c.resolved_p();
    const WeightRule weight = method_weight(c, ctx);
    const double mass = lp_mass(weight, p).mass;
    const bool l2 = c.method == Method::GalerkinL2;

    SampleSet samples = l2 ? mc_samples(ctx.a, ctx.f, c.mc_draws, c.seed, c.jobs, c.k_ref)
                           : linf_samples(ctx.a, ctx.f, SamplerSpec{c.seed, c.corner_dims, c.linf_draws, c.k_ref}, c.jobs);

    ErrorReport report;
    report.method = method_name(c.method);
    report.seed = c.seed;
    report.constants = {{"r", ctx.ell.r},   {"R", ctx.ell.R},     {"K", ctx.rc.K},
                        {"p", p},           {"lp_mass", mass},    {"b_l1", l1(ctx.rc.b)},
                        {"d_l1", l1(ctx.rc.d)}, {"C_D", 1.0 / std::numbers::pi}};
    std::string audit = "n,rank,dim_ok,cost,cost_bound,cost_ok\n";
    std::string cg = "n,iterations,residual\n";
    std::vector<std::string> violations;

    for (std::int64_t n : c.budgets) {
      std::uint64_t rank = 0, cost = 0;
      double cost_bound = 0.0, err = 0.0, se = 0.0;
      bool cost_ok = true;
      auto measure = [&](const auto& S) {
        Evaluator ev = [&](std::span<const double> y) { return evaluate(S, y); };
        if (l2) {
          auto e = error_l2mu(samples, ev, 20, c.jobs);
          err = e.value;
          se = e.std_err;
        } else {
          err = error_linf(samples, ev, c.jobs).value;
        }
        rank = S.rank();
      };
      const fs::path sdir = c.out / "surrogates" / ("n" + std::to_string(n));
      switch (c.method) {
        case Method::Taylor: {
          TaylorBuildOptions o;
          o.jobs = c.jobs;
          auto S = build_taylor(ctx.a, ctx.f, n, p, weight, o);
          measure(S);
          if (c.write_surrogates) write_surrogate(sdir, S);
          break;
        }
        case Method::Colloc: {
          CollocBuildOptions o;
          o.jobs = c.jobs;
          o.sampler = c.sampler;
          auto S = build_colloc(ctx.a, ctx.f, n, p, weight, o);
          measure(S);
          cost = S.cost;
          cost_bound = S.cost_bound;
          cost_ok = S.cost_audit();
          if (c.write_surrogates) write_surrogate(sdir, S);
          break;
        }
        case Method::LegendreLinf:
        case Method::GalerkinL2: {
          LegendreBuildOptions o;
          o.jobs = c.jobs;
          auto S = l2 ? build_galerkin(ctx.a, ctx.f, n, p, weight, o) : build_SL(ctx.a, ctx.f, n, p, weight, o);
          measure(S);
          if (l2) cg += std::to_string(n) + "," + std::to_string(S.cg_iterations) + "," + fmt(S.cg_residual) + "\n";
          if (c.write_surrogates) write_surrogate(sdir, S);
          break;
        }
      }
      const bool dim_ok = rank <= static_cast<std::uint64_t>(n);
      if (!dim_ok) violations.push_back("rank " + std::to_string(rank) + " > n = " + std::to_string(n));
      if (!cost_ok) violations.push_back("cost " + std::to_string(cost) + " > " + fmt(cost_bound) + " at n = " + std::to_string(n));
      audit += std::to_string(n) + "," + std::to_string(rank) + "," + (dim_ok ? "1" : "0") + "," + std::to_string(cost) +
               "," + fmt(cost_bound) + "," + (cost_ok ? "1" : "0") + "\n";
      report.rows.push_back({n, err, se});
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s n=%lld rank=%llu error=%.6e\n", report.method.c_str(), static_cast<long long>(n),
                    static_cast<unsigned long long>(rank), err);
      log << buf;
    }

    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + c.out.string() + ": " + ec.message());
    std::ostringstream csv;
    report.write_csv(csv);
    try {
      auto fit = report.fit();
      csv << "# slope=" << fmt(fit.slope) << " band95=" << fmt(fit.band) << " intercept=" << fmt(fit.intercept) << '\n';
      char buf[128];
      std::snprintf(buf, sizeof buf, "fitted slope %.4f +- %.4f\n", fit.slope, fit.band);
      log << buf;
    } catch (const Error& e) {
      csv << "# slope=unavailable (" << e.what() << ")\n";
    }
    write_text_file(c.out / (report.method + ".csv"), csv.str());
    std::ostringstream side;
    report.write_sidecar(side);
    write_text_file(c.out / (report.method + ".json"), side.str());
    write_text_file(c.out / "audit.csv", audit);
    if (l2) write_text_file(c.out / "cg.csv", cg);
    if (!violations.empty()) {
      for (const auto& v : violations) log << "audit failure: " << v << '\n';
      return kExitNumerical;
    }
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::EllipticityViolation) return kExitGate;
    return kExitNumerical;
  }
}

}  // namespace collective
