#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "kolmo/runner.hpp"

namespace {

// Exit codes: 0 ok, 2 config error, 3 runtime/budget error.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo solver for semilinear Kolmogorov PDEs"};
  std::string config_path;
  std::string output;
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 0;
  bool threads_given = false;
  std::uint64_t budget = 0;
  bool budget_given = false;

  app.add_option("--config", config_path, "Path to the run configuration file")->required();
  app.add_option("--output", output, "Output directory (overrides config)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed override");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (must not change results)");
  auto* budget_opt = app.add_option("--budget", budget, "Path budget override for solve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  seed_given = seed_opt->count() > 0;
  threads_given = threads_opt->count() > 0;
  budget_given = budget_opt->count() > 0;

  kolmo::RunConfig config;
  try {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot read config file: " << config_path << "\n";
      return kExitConfig;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    config = kolmo::parse_config(buf.str());
    if (!output.empty()) config.output = output;
    if (seed_given) {
      config.seed = seed;
      config.seed_set = true;
    }
    if (threads_given) config.threads = threads;
    if (budget_given) config.picard.budget_paths = budget;
  } catch (const kolmo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    kolmo::run(config);
    return kExitOk;
  } catch (const kolmo::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const kolmo::BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
