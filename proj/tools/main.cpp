#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "collective/cli.hpp"
#include "collective/error.hpp"

using namespace collective;

int main(int argc, char** argv) {
  CLI::App app{"Collective sparse surrogates for parametric diffusion"};
  app.require_subcommand(1);

  std::string config_path, out, budgets;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  bool write_surrogates = false;

  auto* run_cmd = app.add_subcommand("run", "Build surrogates for every budget and write error tables");
  run_cmd->add_option("config", config_path, "experiment file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out, "output directory");
  run_cmd->add_option("--seed", seed, "sampler seed");
  run_cmd->add_option("--budgets", budgets, "comma-separated budgets");
  run_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--write-surrogates", write_surrogates, "store each surrogate under <out>/surrogates");

  auto* gates_cmd = app.add_subcommand("gates", "Print ellipticity and summability diagnostics");
  gates_cmd->add_option("config", config_path, "experiment file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  ExperimentConfig config;
  try {
    config = load_config(config_path);
    if (!out.empty()) config.out = out;
    if (seed) config.seed = *seed;
    if (!budgets.empty()) config.budgets = parse_budgets(budgets);
    if (jobs) config.jobs = *jobs;
    if (write_surrogates) config.write_surrogates = true;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return kExitGate;
  }

  if (*gates_cmd) {
    try {
      return gates(config, std::cout) ? kExitOk : kExitGate;
    } catch (const Error& e) {
      std::cerr << e.what() << '\n';
      return kExitGate;
    }
  }
  return run(config, std::cout);
}
