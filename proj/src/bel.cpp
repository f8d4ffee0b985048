#include "kolmo/bel.hpp"

#include <Eigen/LU>
#include <cmath>

#include "kolmo/parallel.hpp"

namespace kolmo {

WeightPrefix weight_prefix(const ProblemSpec& spec, const SdePath& path, const VariationPath& y) {
  const int d = spec.d;
  WeightPrefix prefix;
  prefix.sums.resize(path.states.size());
  prefix.sums[0] = Vec::Zero(d);
  for (std::size_t k = 0; k + 1 < path.states.size(); ++k) {
    const double t = path.grid.time(k);
    const Mat sig = spec.coeffs.sigma(t, path.states[k]);
    Eigen::PartialPivLU<Mat> lu(sig.transpose());
    if (lu.rcond() < 1e-12) {
      throw EllipticityError("bel weight: diffusion matrix numerically singular");
    }
    // (sigma^{-1} Y)^T dW  ==  Y^T sigma^{-T} dW, one solve per step.
    prefix.sums[k + 1] =
        prefix.sums[k] + y.matrices[k].transpose() * lu.solve(path.dW[k]);
  }
  return prefix;
}

BelWeight bel_weight_from_prefix(const WeightPrefix& prefix, const TimeGrid& grid,
                                 double horizon_T, std::size_t s_index) {
  if (s_index == 0) {
    throw UsageError("bel weight: singular horizon s = t (the 1/(s-t) factor)");
  }
  if (s_index >= prefix.sums.size()) throw UsageError("bel weight: index out of range");
  const double t = grid.t_start();
  const double s = grid.time(s_index);
  if (s - t < kMinHorizonFraction * horizon_T) {
    throw UsageError("bel weight: horizon below the minimum guard");
  }
  BelWeight w;
  w.t = t;
  w.s = s;
  w.value = Vec(prefix.sums[s_index].size() + 1);
  w.value[0] = 1.0;
  w.value.tail(prefix.sums[s_index].size()) = prefix.sums[s_index] / (s - t);
  if (!w.value.allFinite()) throw SimulationError("bel weight: non-finite weight", s_index);
  return w;
}

BelWeight bel_weight(const ProblemSpec& spec, const SdePath& path, const VariationPath& y,
                     std::size_t s_index) {
  return bel_weight_from_prefix(weight_prefix(spec, path, y), path.grid, spec.T, s_index);
}

double bel_weight_second_moment_bound(const ProblemSpec& spec, double t, double s) {
  if (!(s > t)) throw UsageError("bel weight bound: requires s > t");
  const double tau = s - t;
  const double integral =
      spec.c > 0.0 ? (std::exp(2.0 * spec.c * tau) - 1.0) / (2.0 * spec.c) : tau;
  return static_cast<double>(spec.d) / (spec.alpha * tau * tau) * integral;
}

MomentReport weight_moment_report(const ProblemSpec& spec, const Vec& x0, double t, double s,
                                  std::uint64_t n_paths, std::size_t grid_steps, RngStream rng,
                                  unsigned threads) {
  if (!(s > t)) throw UsageError("weight_moment_report: requires s > t");
  const TimeGrid grid(t, s, grid_steps);
  std::vector<Eigen::VectorXd> grad_parts(n_paths);
  std::vector<Eigen::VectorXd> sq_norms(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const SdePath path = simulate_path(spec, x0, grid, rng.child(i).child(0));
      const VariationPath y = simulate_first_variation(spec, path);
      const BelWeight w = bel_weight(spec, path, y, grid.n_steps());
      grad_parts[i] = w.value.tail(spec.d);
      sq_norms[i] = Vec::Constant(1, grad_parts[i].squaredNorm());
    }
  });
  const Estimate mean_est = reduce_samples(grad_parts);
  const Estimate sq_est = reduce_samples(sq_norms);
  MomentReport report;
  report.t = t;
  report.s = s;
  report.n_paths = n_paths;
  report.mean_norm = mean_est.mean.norm();
  report.second_moment = sq_est.mean[0];
  report.second_moment_se = sq_est.stderr_[0];
  report.paper_bound = bel_weight_second_moment_bound(spec, t, s);
  report.pass = report.second_moment <= report.paper_bound + 3.0 * report.second_moment_se;
  return report;
}

}  // namespace kolmo
