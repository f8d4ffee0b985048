#include "kolmo/picard.hpp"

#include <cmath>
#include <limits>

#include "kolmo/parallel.hpp"

namespace kolmo {

namespace {

// Substream tag for the V_{l-1} argument inside a multilevel correction; node
// tags stay far below this.
constexpr std::uint64_t kAltBranchTag = std::uint64_t{1} << 40;

std::uint64_t quadrature_branches(const PicardConfig& cfg) {
  return cfg.quadrature == Quadrature::LeftPoint
             ? static_cast<std::uint64_t>(cfg.grid_steps - 1)
             : 1;
}

std::uint64_t plain_paths(const PicardConfig& cfg, int level) {
  if (level <= 0) return 0;
  const std::uint64_t q = quadrature_branches(cfg);
  return cfg.samples_per_level[level - 1] * (1 + q * plain_paths(cfg, level - 1));
}

std::uint64_t mlp_paths(const PicardConfig& cfg, int level) {
  if (level <= 0) return 0;
  const std::uint64_t q = quadrature_branches(cfg);
  std::uint64_t total = 0;
  for (int l = 0; l < level; ++l) {
    const std::uint64_t m = cfg.samples_per_level[level - l - 1];
    const std::uint64_t inner = mlp_paths(cfg, l) + (l >= 1 ? mlp_paths(cfg, l - 1) : 0);
    total += m * (1 + q * inner);
  }
  return total;
}

// Remaining horizon below which a recursive evaluation returns the terminal
// data (g(x), 0) instead of simulating: the running term it would estimate is
// O(floor) while its weights would fall under the minimum-horizon guard.
double horizon_floor(const ProblemSpec& spec, const PicardConfig& cfg) {
  return std::max(1e-4, 2.0 * static_cast<double>(cfg.grid_steps) * kMinHorizonFraction) *
         spec.T;
}

struct Evaluator {
  const ProblemSpec& spec;
  const PicardConfig& cfg;
  std::uint64_t paths = 0;

  // One sample of Phi(V_{level-1})(t, x); `inner` evaluates V_{level-1}.
  template <typename InnerFn>
  Vec phi_sample(double t, const Vec& x, RngStream sample_stream, InnerFn&& inner) {
    const TimeGrid grid(t, spec.T, cfg.grid_steps);
    const SdePath path = simulate_path(spec, x, grid, sample_stream.child(0));
    ++paths;
    const VariationPath y = simulate_first_variation(spec, path);
    const WeightPrefix prefix = weight_prefix(spec, path, y);
    Vec acc = spec.g(path.states.back()) *
              bel_weight_from_prefix(prefix, grid, spec.T, grid.n_steps()).value;
    if (cfg.quadrature == Quadrature::LeftPoint) {
      for (std::size_t k = 1; k < grid.n_steps(); ++k) {
        acc += running_term(grid, path, prefix, k, inner(grid.time(k), path.states[k],
                                                         sample_stream.child(k))) *
               grid.dt(k);
      }
    } else if (grid.n_steps() > 1) {
      // Unbiased single-node estimate of the same left-point sum.
      RngStream node_rng = sample_stream.child(cfg.grid_steps + 1);
      const auto n_nodes = grid.n_steps() - 1;
      std::size_t k = 1 + static_cast<std::size_t>(node_rng.uniform() * n_nodes);
      if (k > n_nodes) k = n_nodes;
      acc += running_term(grid, path, prefix, k,
                          inner(grid.time(k), path.states[k], sample_stream.child(k))) *
             grid.dt(k) * static_cast<double>(n_nodes);
    }
    return acc;
  }

  Vec running_term(const TimeGrid& grid, const SdePath& path, const WeightPrefix& prefix,
                   std::size_t k, const Vec& inner_vg) {
    const double fk = spec.f(grid.time(k), path.states[k], inner_vg[0], inner_vg.tail(spec.d));
    return Vec(fk * bel_weight_from_prefix(prefix, grid, spec.T, k).value);
  }

  Vec terminal_proxy(const Vec& x) const {
    Vec vg = Vec::Zero(spec.d + 1);
    vg[0] = spec.g(x);
    return vg;
  }

  Vec plain_eval(int level, double t, const Vec& x, RngStream level_stream) {
    if (level == 0) return Vec::Zero(spec.d + 1);
    if (spec.T - t < horizon_floor(spec, cfg)) return terminal_proxy(x);
    const std::uint64_t m = cfg.samples_per_level[level - 1];
    Vec acc = Vec::Zero(spec.d + 1);
    for (std::uint64_t i = 0; i < m; ++i) {
      acc += phi_sample(t, x, level_stream.child(i),
                        [&](double tk, const Vec& xk, RngStream inner_stream) {
                          return plain_eval(level - 1, tk, xk, inner_stream);
                        });
    }
    return acc / static_cast<double>(m);
  }

  Vec mlp_eval(int level, double t, const Vec& x, RngStream stream) {
    if (level == 0) return Vec::Zero(spec.d + 1);
    if (spec.T - t < horizon_floor(spec, cfg)) return terminal_proxy(x);
    Vec acc = Vec::Zero(spec.d + 1);
    for (int l = 0; l < level; ++l) {
      const std::uint64_t m = cfg.samples_per_level[level - l - 1];
      const RngStream level_stream = stream.child(l);
      Vec level_acc = Vec::Zero(spec.d + 1);
      for (std::uint64_t i = 0; i < m; ++i) {
        level_acc += mlp_correction(l, t, x, level_stream.child(i));
      }
      acc += level_acc / static_cast<double>(m);
    }
    return acc;
  }

  // Phi_i(V_l) - Phi_i(V_{l-1}) on a shared outer path: the terminal parts
  // cancel exactly, only the running nonlinearity survives for l >= 1.
  Vec mlp_correction(int l, double t, const Vec& x, RngStream sample_stream) {
    if (l == 0) {
      return phi_sample(t, x, sample_stream,
                        [&](double tk, const Vec& xk, RngStream inner_stream) {
                          return mlp_eval(0, tk, xk, inner_stream);
                        });
    }
    const TimeGrid grid(t, spec.T, cfg.grid_steps);
    const SdePath path = simulate_path(spec, x, grid, sample_stream.child(0));
    ++paths;
    const VariationPath y = simulate_first_variation(spec, path);
    const WeightPrefix prefix = weight_prefix(spec, path, y);
    Vec acc = Vec::Zero(spec.d + 1);
    auto node_term = [&](std::size_t k) {
      const Vec fine = mlp_eval(l, grid.time(k), path.states[k], sample_stream.child(k));
      const Vec coarse =
          mlp_eval(l - 1, grid.time(k), path.states[k], sample_stream.child(kAltBranchTag + k));
      return Vec(running_term(grid, path, prefix, k, fine) -
                 running_term(grid, path, prefix, k, coarse));
    };
    if (cfg.quadrature == Quadrature::LeftPoint) {
      for (std::size_t k = 1; k < grid.n_steps(); ++k) {
        acc += node_term(k) * grid.dt(k);
      }
    } else if (grid.n_steps() > 1) {
      RngStream node_rng = sample_stream.child(cfg.grid_steps + 1);
      const auto n_nodes = grid.n_steps() - 1;
      std::size_t k = 1 + static_cast<std::size_t>(node_rng.uniform() * n_nodes);
      if (k > n_nodes) k = n_nodes;
      acc += node_term(k) * grid.dt(k) * static_cast<double>(n_nodes);
    }
    return acc;
  }
};

void check_query(const ProblemSpec& spec, double t, const Vec& x) {
  if (x.size() != spec.d) throw UsageError("picard: x dimension mismatch");
  if (t < 0.0 || !(t < spec.T)) {
    throw UsageError(
        "picard: requires t in [0, T); use terminal_value_gradient at t = T");
  }
}

}  // namespace

void PicardConfig::validate() const {
  if (depth < 1) throw UsageError("PicardConfig: depth must be >= 1");
  if (samples_per_level.size() != static_cast<std::size_t>(depth)) {
    throw UsageError("PicardConfig: samples_per_level must have one entry per level");
  }
  for (const auto m : samples_per_level) {
    if (m == 0) throw UsageError("PicardConfig: sample counts must be positive");
  }
  if (grid_steps == 0) throw UsageError("PicardConfig: grid_steps must be positive");
  if (scheme == PicardScheme::Multilevel) {
    // level-l corrections receive M[depth-l]; require them nonincreasing in l
    for (std::size_t j = 1; j < samples_per_level.size(); ++j) {
      if (samples_per_level[j] < samples_per_level[j - 1]) {
        throw UsageError("PicardConfig: multilevel sample counts must not grow with level");
      }
    }
  }
}

std::uint64_t predicted_path_count(const PicardConfig& cfg) {
  cfg.validate();
  return cfg.scheme == PicardScheme::Plain ? plain_paths(cfg, cfg.depth)
                                           : mlp_paths(cfg, cfg.depth);
}

ValueGradient terminal_value_gradient(const ProblemSpec& spec, const Vec& x) {
  ValueGradient out;
  out.t = spec.T;
  out.x = x;
  out.vg = Vec::Constant(spec.d + 1, std::numeric_limits<double>::quiet_NaN());
  out.vg[0] = spec.g(x);
  out.stderr_ = Vec::Zero(spec.d + 1);
  return out;
}

namespace {

ValueGradient evaluate_top(const ProblemSpec& spec, double t, const Vec& x,
                           const PicardConfig& cfg, RngStream rng, bool multilevel) {
  check_query(spec, t, x);
  cfg.validate();
  const std::uint64_t predicted = multilevel ? mlp_paths(cfg, cfg.depth)
                                             : plain_paths(cfg, cfg.depth);
  if (predicted > cfg.budget_paths) {
    throw BudgetError("picard: predicted cost exceeds budget", predicted, cfg.budget_paths);
  }

  ValueGradient out;
  out.t = t;
  out.x = x;

  if (!multilevel) {
    // Top level: per-sample values kept for the standard error.
    const std::uint64_t m = cfg.samples_per_level[cfg.depth - 1];
    const RngStream level_stream = rng.child(0);
    std::vector<Vec> samples(m);
    std::vector<std::uint64_t> path_counts(m, 0);
    parallel_for(m, cfg.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        Evaluator ev{spec, cfg};
        samples[i] = ev.phi_sample(t, x, level_stream.child(i),
                                   [&](double tk, const Vec& xk, RngStream inner_stream) {
                                     return ev.plain_eval(cfg.depth - 1, tk, xk, inner_stream);
                                   });
        path_counts[i] = ev.paths;
      }
    });
    const Estimate est = reduce_samples(samples);
    out.vg = est.mean;
    out.stderr_ = est.stderr_;
    out.n_samples = est.n_samples;
    for (const auto p : path_counts) out.paths_used += p;
    return out;
  }

  // Multilevel: levels are independent, so their variances add.
  out.vg = Vec::Zero(spec.d + 1);
  Vec var = Vec::Zero(spec.d + 1);
  std::uint64_t top_samples = 0;
  for (int l = 0; l < cfg.depth; ++l) {
    const std::uint64_t m = cfg.samples_per_level[cfg.depth - l - 1];
    // Level 0 reuses the plain stream layout so a depth-1 run is bit-identical
    // to the plain scheme (no telescope at depth 1).
    const RngStream level_stream = l == 0 ? rng.child(0) : rng.child(0).child(l);
    std::vector<Vec> samples(m);
    std::vector<std::uint64_t> path_counts(m, 0);
    parallel_for(m, cfg.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        Evaluator ev{spec, cfg};
        samples[i] = ev.mlp_correction(l, t, x, level_stream.child(i));
        path_counts[i] = ev.paths;
      }
    });
    const Estimate est = reduce_samples(samples);
    out.vg += est.mean;
    var += est.stderr_.cwiseProduct(est.stderr_);
    if (l == 0) top_samples = m;
    for (const auto p : path_counts) out.paths_used += p;
  }
  out.stderr_ = var.cwiseSqrt();
  out.n_samples = top_samples;
  return out;
}

}  // namespace

ValueGradient picard_evaluate(const ProblemSpec& spec, double t, const Vec& x,
                              const PicardConfig& cfg, RngStream rng) {
  if (cfg.scheme == PicardScheme::Multilevel) return mlp_evaluate(spec, t, x, cfg, rng);
  return evaluate_top(spec, t, x, cfg, rng, /*multilevel=*/false);
}

ValueGradient mlp_evaluate(const ProblemSpec& spec, double t, const Vec& x,
                           const PicardConfig& cfg, RngStream rng) {
  PicardConfig ml = cfg;
  ml.scheme = PicardScheme::Multilevel;
  return evaluate_top(spec, t, x, ml, rng, /*multilevel=*/true);
}

ResidualReport fixed_point_residual(const ProblemSpec& spec, const PointEvaluator& candidate,
                                    const std::vector<StateProbe>& probes, const FixedPointMc& mc,
                                    RngStream rng, double bias_tolerance) {
  if (probes.empty()) throw UsageError("fixed_point_residual: empty probe list");
  ResidualReport report;
  report.tolerance = bias_tolerance;
  for (std::size_t pi = 0; pi < probes.size(); ++pi) {
    const auto& probe = probes[pi];
    check_query(spec, probe.s, probe.x);
    const TimeGrid grid(probe.s, spec.T, mc.grid_steps);
    const RngStream probe_rng = rng.child(pi);
    std::vector<Vec> samples(mc.n_paths);
    parallel_for(mc.n_paths, mc.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const SdePath path =
            simulate_path(spec, probe.x, grid, path_stream(probe_rng, i));
        const VariationPath y = simulate_first_variation(spec, path);
        const WeightPrefix prefix = weight_prefix(spec, path, y);
        Vec acc = spec.g(path.states.back()) *
                  bel_weight_from_prefix(prefix, grid, spec.T, grid.n_steps()).value;
        for (std::size_t k = 1; k < grid.n_steps(); ++k) {
          const Vec cand = candidate(grid.time(k), path.states[k]);
          const double fk =
              spec.f(grid.time(k), path.states[k], cand[0], cand.tail(spec.d));
          acc += fk * grid.dt(k) * bel_weight_from_prefix(prefix, grid, spec.T, k).value;
        }
        samples[i] = acc;
      }
    });
    const Estimate est = reduce_samples(samples);
    const Vec resid = est.mean - candidate(probe.s, probe.x);
    const double resid_norm = resid.norm();
    const double se = est.stderr_.norm();
    report.probes.push_back(probe);
    report.residuals.push_back(resid_norm);
    report.stderrs.push_back(se);
    report.pass.push_back(resid_norm <= bias_tolerance + 3.0 * se);
  }
  return report;
}

}  // namespace kolmo
