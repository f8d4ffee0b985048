#include "kolmo/estimators.hpp"

#include "kolmo/parallel.hpp"

namespace kolmo {

namespace {

void check_horizon(const ProblemSpec& spec, double t) {
  if (!(t < spec.T)) throw UsageError("estimator: requires t < T");
  if (t < 0.0) throw UsageError("estimator: requires t >= 0");
}

std::vector<Vec> negated(const std::vector<Vec>& incs) {
  std::vector<Vec> out(incs.size());
  for (std::size_t k = 0; k < incs.size(); ++k) out[k] = -incs[k];
  return out;
}

// Runs one sample per slot; with antithetic pairing each slot averages the
// +W and -W trajectories of the same draw.
template <typename SampleFn>
Estimate run_mc(const ProblemSpec& spec, const TimeGrid& grid, const McConfig& mc, RngStream rng,
                SampleFn&& sample) {
  if (mc.n_paths == 0) throw UsageError("estimator: n_paths must be positive");
  if (mc.antithetic && mc.n_paths % 2 != 0) {
    throw UsageError("estimator: antithetic sampling needs an even n_paths");
  }
  const std::uint64_t n_slots = mc.antithetic ? mc.n_paths / 2 : mc.n_paths;
  std::vector<Vec> slots(n_slots);
  parallel_for(n_slots, mc.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::vector<Vec> incs = sample_brownian(grid, spec.d, path_stream(rng, i));
      if (mc.antithetic) {
        slots[i] = 0.5 * (sample(incs) + sample(negated(incs)));
      } else {
        slots[i] = sample(incs);
      }
    }
  });
  return reduce_samples(slots);
}

}  // namespace

Estimate estimate_value(const ProblemSpec& spec, double t, const Vec& x, const TerminalFn& g,
                        const SourceFn& h, const McConfig& mc, RngStream rng) {
  check_horizon(spec, t);
  const TimeGrid grid(t, spec.T, mc.grid_steps);
  return run_mc(spec, grid, mc, rng, [&](const std::vector<Vec>& incs) {
    const SdePath path = simulate_path(spec, x, grid, incs);
    double v = g(path.states.back());
    if (h) {
      for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        v += h(grid.time(k), path.states[k]) * grid.dt(k);
      }
    }
    return Vec(Vec::Constant(1, v));
  });
}

Estimate estimate_gradient_bel(const ProblemSpec& spec, double t, const Vec& x,
                               const TerminalFn& payoff, const McConfig& mc, RngStream rng) {
  check_horizon(spec, t);
  const TimeGrid grid(t, spec.T, mc.grid_steps);
  return run_mc(spec, grid, mc, rng, [&](const std::vector<Vec>& incs) {
    const SdePath path = simulate_path(spec, x, grid, incs);
    const VariationPath y = simulate_first_variation(spec, path);
    const BelWeight w = bel_weight(spec, path, y, grid.n_steps());
    return Vec(payoff(path.states.back()) * w.value.tail(spec.d));
  });
}

Estimate estimate_value_gradient(const ProblemSpec& spec, double t, const Vec& x,
                                 const TerminalFn& g, const SourceFn& h, const McConfig& mc,
                                 RngStream rng) {
  check_horizon(spec, t);
  const TimeGrid grid(t, spec.T, mc.grid_steps);
  return run_mc(spec, grid, mc, rng, [&](const std::vector<Vec>& incs) {
    const SdePath path = simulate_path(spec, x, grid, incs);
    const VariationPath y = simulate_first_variation(spec, path);
    const WeightPrefix prefix = weight_prefix(spec, path, y);
    Vec acc = g(path.states.back()) *
              bel_weight_from_prefix(prefix, grid, spec.T, grid.n_steps()).value;
    if (h) {
      for (std::size_t k = 1; k < grid.n_steps(); ++k) {
        const double hk = h(grid.time(k), path.states[k]);
        acc += hk * grid.dt(k) * bel_weight_from_prefix(prefix, grid, spec.T, k).value;
      }
    }
    return acc;
  });
}

}  // namespace kolmo
