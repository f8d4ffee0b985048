#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kolmo/picard.hpp"

namespace kolmo {

enum class Command { Value, Gradient, Solve, Verify, Converge, Moments };

/// One experiment: problem selection, command, query point, budgets, seed.
struct RunConfig {
  // [problem]
  std::string preset;  // named preset, or "custom"
  int d = 1;
  double T = 1.0;
  std::string drift = "zero";       // custom: zero | ou | linear | sine
  double drift_param = 1.0;
  std::string diffusion = "const";  // custom: const | gbm
  double diffusion_param = 1.0;

  // [run]
  Command command = Command::Value;
  double t = 0.0;
  Vec x;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string output = "out";
  unsigned threads = 0;
  std::string axis = "n_paths";
  std::vector<std::uint64_t> axis_values;

  // [mc]
  McConfig mc;

  // [picard]
  PicardConfig picard;

  std::string raw_text;  // hashed into every output header
};

/// Parse the flat INI-style config text.  Unknown keys, type mismatches and
/// out-of-range values produce ConfigError with the key name and line number.
RunConfig parse_config(const std::string& text);

/// Instantiate the problem a config refers to (preset or closed-form custom
/// coefficients) and validate the query point against it.
Problem build_problem(const RunConfig& config);

}  // namespace kolmo
