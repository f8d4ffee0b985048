#pragma once

#include <cstdint>

#include "kolmo/bel.hpp"
#include "kolmo/stats.hpp"
#include "kolmo/time_grid.hpp"

namespace kolmo {

struct McConfig {
  std::uint64_t n_paths = 10000;
  std::size_t grid_steps = kDefaultGridSteps;
  unsigned threads = 0;
  bool antithetic = false;
};

/// Sample stream for path index i; shared by every estimator so that runs with
/// the same seed see the same trajectories.
inline RngStream path_stream(const RngStream& root, std::uint64_t i) {
  return root.child(0).child(i).child(0);
}

/// Linear Feynman-Kac value: MC mean of g(X_T) + sum_k h(t_k, X_k) dt_k
/// (left-point quadrature; terminal data taken from `g`).
Estimate estimate_value(const ProblemSpec& spec, double t, const Vec& x, const TerminalFn& g,
                        const SourceFn& h, const McConfig& mc, RngStream rng);

/// Gradient via the Bismut-Elworthy-Li weight: MC mean of payoff(X_T) Z_[1..d].
Estimate estimate_gradient_bel(const ProblemSpec& spec, double t, const Vec& x,
                               const TerminalFn& payoff, const McConfig& mc, RngStream rng);

/// Joint (d+1)-estimate of value and gradient: MC mean of
/// g(X_T) Z_{t,T} + sum_{k>=1} h(t_k, X_k) Z_{t,t_k} dt_k (first node dropped,
/// the weight is undefined at s = t).
Estimate estimate_value_gradient(const ProblemSpec& spec, double t, const Vec& x,
                                 const TerminalFn& g, const SourceFn& h, const McConfig& mc,
                                 RngStream rng);

}  // namespace kolmo
