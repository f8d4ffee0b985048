#pragma once

#include <cstdint>
#include <vector>

#include "kolmo/estimators.hpp"

namespace kolmo {

enum class Quadrature { LeftPoint, RandomizedUniform };
enum class PicardScheme { Plain, Multilevel };

struct PicardConfig {
  int depth = 3;
  std::vector<std::uint64_t> samples_per_level;  // M[1..depth], entry j-1 is level j
  std::size_t grid_steps = 16;
  Quadrature quadrature = Quadrature::LeftPoint;
  PicardScheme scheme = PicardScheme::Plain;
  std::uint64_t budget_paths = 20'000'000;
  unsigned threads = 0;

  void validate() const;
};

/// Estimate of the pair (v, grad v) at a space-time point.
struct ValueGradient {
  double t = 0.0;
  Vec x;
  Vec vg;        // size d+1: value then gradient
  Vec stderr_;   // same shape
  std::uint64_t n_samples = 0;
  std::uint64_t paths_used = 0;
};

/// Number of path simulations the evaluation will perform, exactly.
std::uint64_t predicted_path_count(const PicardConfig& cfg);

/// (g(x), unpopulated gradient): the fixed-point pair is only defined on [0,T).
ValueGradient terminal_value_gradient(const ProblemSpec& spec, const Vec& x);

/// Nested Monte-Carlo Picard iterate of the stochastic fixed-point equation:
/// V_0 = 0,  V_n(t,x) = MC mean of [ g(X_T) Z_{t,T}
///   + sum_{k>=1} f(t_k, X_k, V_{n-1}(t_k, X_k)) Z_{t,t_k} dt_k ],
/// with fresh substreams for every recursive evaluation.
ValueGradient picard_evaluate(const ProblemSpec& spec, double t, const Vec& x,
                              const PicardConfig& cfg, RngStream rng);

/// Telescoping multilevel variant: level-l corrections share the outer path
/// between the V_l and V_{l-1} arguments; levels are sampled independently.
ValueGradient mlp_evaluate(const ProblemSpec& spec, double t, const Vec& x,
                           const PicardConfig& cfg, RngStream rng);

/// Candidate solution evaluated pointwise; returns a (d+1)-vector [v; grad v].
using PointEvaluator = std::function<Vec(double, const Vec&)>;

/// Per-probe residual statistics with pass flags.
struct ResidualReport {
  std::vector<StateProbe> probes;
  std::vector<double> residuals;
  std::vector<double> stderrs;
  std::vector<bool> pass;
  double tolerance = 0.0;

  bool all_pass() const {
    for (bool p : pass) {
      if (!p) return false;
    }
    return !pass.empty();
  }
};

struct FixedPointMc {
  std::uint64_t n_paths = 4000;
  std::size_t grid_steps = 64;
  unsigned threads = 0;
};

/// MC estimate of Phi(candidate)(t,x) - candidate(t,x) at each probe, where
/// Phi is the right-hand side of the fixed-point equation.  A small residual
/// everywhere is the numerical uniqueness / consistency check.
ResidualReport fixed_point_residual(const ProblemSpec& spec, const PointEvaluator& candidate,
                                    const std::vector<StateProbe>& probes, const FixedPointMc& mc,
                                    RngStream rng, double bias_tolerance = 0.0);

}  // namespace kolmo
