#pragma once

#include <cstdint>
#include <vector>

#include "kolmo/sde.hpp"
#include "kolmo/stats.hpp"

namespace kolmo {

/// Bismut-Elworthy-Li weight vector: leading exact 1, then the normalized
/// stochastic integral of (sigma^{-1} Y)^T against the driving noise.
struct BelWeight {
  Vec value;  // size d+1, value[0] == 1
  double t = 0.0;
  double s = 0.0;
};

/// Running Ito sums sum_{j<k} (sigma_j^{-1} Y_j)^T dW_j for every grid node,
/// so one simulated path yields the weight at every horizon.
struct WeightPrefix {
  std::vector<Vec> sums;  // n_steps + 1 entries of size d, sums[0] = 0
};

/// Weights with horizon shorter than this fraction of T are refused (the
/// 1/(s-t) factor makes their variance diverge).
inline constexpr double kMinHorizonFraction = 1e-6;

WeightPrefix weight_prefix(const ProblemSpec& spec, const SdePath& path, const VariationPath& y);

/// Weight at grid node s_index (>= 1) from precomputed prefix sums.
BelWeight bel_weight_from_prefix(const WeightPrefix& prefix, const TimeGrid& grid, double horizon_T,
                                 std::size_t s_index);

BelWeight bel_weight(const ProblemSpec& spec, const SdePath& path, const VariationPath& y,
                     std::size_t s_index);

/// Second-moment bound of the gradient part: d/(alpha (s-t)^2) * int_t^s e^{2c(r-t)} dr.
double bel_weight_second_moment_bound(const ProblemSpec& spec, double t, double s);

/// Monte-Carlo weight diagnostics against the second-moment bound.
struct MomentReport {
  double t = 0.0;
  double s = 0.0;
  std::uint64_t n_paths = 0;
  double mean_norm = 0.0;       // |MC mean of the gradient part|
  double second_moment = 0.0;   // MC estimate of E |Z_[1..d]|^2
  double second_moment_se = 0.0;
  double paper_bound = 0.0;
  bool pass = false;
};

MomentReport weight_moment_report(const ProblemSpec& spec, const Vec& x0, double t, double s,
                                  std::uint64_t n_paths, std::size_t grid_steps, RngStream rng,
                                  unsigned threads = 0);

}  // namespace kolmo
