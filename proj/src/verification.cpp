#include "kolmo/verification.hpp"

#include <chrono>
#include <cmath>

#include "kolmo/parallel.hpp"

namespace kolmo {

namespace {

double value_of(const PointEvaluator& u_eval, double t, const Vec& x) {
  return u_eval(t, x)[0];
}

}  // namespace

ResidualReport pde_residual(const ProblemSpec& spec, const PointEvaluator& u_eval,
                            const std::vector<StateProbe>& probes, FdSteps fd,
                            double rel_tolerance, const PointEvaluator& stderr_eval) {
  if (probes.empty()) throw UsageError("pde_residual: empty probe list");
  ResidualReport report;
  report.tolerance = rel_tolerance;
  for (const auto& probe : probes) {
    const double t = probe.s;
    const Vec& x = probe.x;
    const double ht = fd.h_t;
    if (!(t - ht > 0.0) || !(t + ht < spec.T)) {
      throw UsageError("pde_residual: probe too close to the time boundary for the stencil");
    }
    const double hx = fd.h_x * (1.0 + x.norm());

    const Vec at = u_eval(t, x);
    const double u0 = at[0];
    const double du_dt = (value_of(u_eval, t + ht, x) - value_of(u_eval, t - ht, x)) / (2.0 * ht);

    Vec grad = at.tail(spec.d);
    if (!grad.allFinite()) {
      grad.resize(spec.d);
      Vec xp = x, xm = x;
      for (int i = 0; i < spec.d; ++i) {
        xp[i] = x[i] + hx;
        xm[i] = x[i] - hx;
        grad[i] = (value_of(u_eval, t, xp) - value_of(u_eval, t, xm)) / (2.0 * hx);
        xp[i] = x[i];
        xm[i] = x[i];
      }
    }

    Mat hess(spec.d, spec.d);
    for (int i = 0; i < spec.d; ++i) {
      Vec xp = x, xm = x;
      xp[i] += hx;
      xm[i] -= hx;
      hess(i, i) =
          (value_of(u_eval, t, xp) - 2.0 * u0 + value_of(u_eval, t, xm)) / (hx * hx);
      for (int j = i + 1; j < spec.d; ++j) {
        Vec xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[i] += hx; xpp[j] += hx;
        xpm[i] += hx; xpm[j] -= hx;
        xmp[i] -= hx; xmp[j] += hx;
        xmm[i] -= hx; xmm[j] -= hx;
        const double mixed = (value_of(u_eval, t, xpp) - value_of(u_eval, t, xpm) -
                              value_of(u_eval, t, xmp) + value_of(u_eval, t, xmm)) /
                             (4.0 * hx * hx);
        hess(i, j) = mixed;
        hess(j, i) = mixed;
      }
    }

    const Mat sig = spec.coeffs.sigma(t, x);
    const double drift_term = spec.coeffs.mu(t, x).dot(grad);
    const double diff_term = 0.5 * ((sig * sig.transpose()).cwiseProduct(hess)).sum();
    const double f_term = spec.f(t, x, u0, grad);
    const double residual = du_dt + drift_term + diff_term + f_term;
    const double scale =
        1.0 + std::abs(du_dt) + std::abs(drift_term) + std::abs(diff_term) + std::abs(f_term);

    double se = 0.0;
    if (stderr_eval) {
      // Propagate candidate noise through the stencil weights.
      const double se_point = stderr_eval(t, x).norm();
      se = se_point * (1.0 / ht + static_cast<double>(spec.d * spec.d) / (hx * hx));
      if (se_point >= rel_tolerance * scale / 3.0) {
        throw UsageError("pde_residual: candidate stderr too large for the tolerance");
      }
    }

    report.probes.push_back(probe);
    report.residuals.push_back(residual);
    report.stderrs.push_back(se);
    report.pass.push_back(std::abs(residual) <= rel_tolerance * scale + 3.0 * se);
  }
  return report;
}

CrosscheckReport gradient_crosscheck(const ProblemSpec& spec, double t, const Vec& x,
                                     const TerminalFn& payoff, const McConfig& mc, RngStream rng,
                                     double fd_step, double rel_tolerance) {
  const TimeGrid grid(t, spec.T, mc.grid_steps);
  const int d = spec.d;

  const Estimate bel = estimate_gradient_bel(spec, t, x, payoff, mc, rng);

  // Bump-and-revalue with the same increments per path; the difference is
  // accumulated pathwise so its stderr reflects the common-random-number
  // coupling.
  std::vector<Vec> fd_samples(mc.n_paths);
  parallel_for(mc.n_paths, mc.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::vector<Vec> incs = sample_brownian(grid, d, path_stream(rng, i));
      Vec row(d);
      for (int j = 0; j < d; ++j) {
        Vec xp = x, xm = x;
        xp[j] += fd_step;
        xm[j] -= fd_step;
        const double up = payoff(simulate_path(spec, xp, grid, incs).states.back());
        const double um = payoff(simulate_path(spec, xm, grid, incs).states.back());
        row[j] = (up - um) / (2.0 * fd_step);
      }
      fd_samples[i] = std::move(row);
    }
  });
  const Estimate fd = reduce_samples(fd_samples);

  CrosscheckReport report;
  report.t = t;
  report.x = x;
  report.bel = bel.mean;
  report.bel_se = bel.stderr_;
  report.fd = fd.mean;
  report.fd_se = fd.stderr_;
  report.scale = fd.mean.norm();
  report.pass = true;
  for (int j = 0; j < d; ++j) {
    const double gap = std::abs(report.bel[j] - report.fd[j]);
    const double combined =
        std::sqrt(report.bel_se[j] * report.bel_se[j] + report.fd_se[j] * report.fd_se[j]);
    if (gap > std::max(3.0 * combined, rel_tolerance * report.scale)) report.pass = false;
  }
  return report;
}

std::vector<ConvergenceRow> convergence_study(const ProblemSpec& spec, double t, const Vec& x,
                                              ConvergenceAxis axis,
                                              const std::vector<std::uint64_t>& values,
                                              const ConvergenceStudyConfig& cfg, RngStream rng) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] <= values[i - 1]) throw UsageError("convergence_study: values must increase");
  }
  std::vector<ConvergenceRow> rows;
  for (const auto v : values) {
    ConvergenceRow row;
    row.axis_value = static_cast<double>(v);
    const auto start = std::chrono::steady_clock::now();
    if (axis == ConvergenceAxis::Depth) {
      PicardConfig pc = cfg.picard;
      pc.depth = static_cast<int>(v);
      if (pc.samples_per_level.size() < static_cast<std::size_t>(pc.depth)) {
        throw UsageError("convergence_study: samples_per_level shorter than max depth");
      }
      // Top-aligned allocation: the top level keeps its sample count so the
      // statistical error is comparable across depths.
      pc.samples_per_level.assign(cfg.picard.samples_per_level.end() - pc.depth,
                                  cfg.picard.samples_per_level.end());
      const ValueGradient vg = picard_evaluate(spec, t, x, pc, rng);
      row.estimate = vg.vg;
      row.stderr_ = vg.stderr_;
    } else {
      McConfig mc = cfg.mc;
      if (axis == ConvergenceAxis::NPaths) mc.n_paths = v;
      if (axis == ConvergenceAxis::GridSteps) mc.grid_steps = static_cast<std::size_t>(v);
      const Estimate est =
          estimate_value_gradient(spec, t, x, spec.g, nullptr, mc, rng);
      row.estimate = est.mean;
      row.stderr_ = est.stderr_;
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cfg.oracle) {
      row.error = (row.estimate - cfg.oracle->value_gradient(t, x)).norm();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MomentCertRow> moment_certificates(const ProblemSpec& spec, const LyapunovVq& vq,
                                               double rho, double t, const Vec& x,
                                               const std::vector<double>& horizons,
                                               std::uint64_t n_paths, std::size_t grid_steps,
                                               RngStream rng, unsigned threads) {
  if (rho < 0.0) throw UsageError("moment_certificates: rho must be nonnegative");
  std::vector<MomentCertRow> rows;
  for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
    const double tau = horizons[hi];
    const double s = t + tau;
    if (!(tau > 0.0) || s > spec.T + 1e-12) {
      throw UsageError("moment_certificates: horizon outside (t, T]");
    }
    const TimeGrid grid(t, s, grid_steps);
    const RngStream horizon_rng = rng.child(hi);
    std::vector<double> samples(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const SdePath path = simulate_path(spec, x, grid, path_stream(horizon_rng, i));
        samples[i] = std::exp(-rho * tau) * vq.value(path.states.back());
      }
    });
    const Estimate est = reduce_scalar_samples(samples);
    MomentCertRow row;
    row.horizon = tau;
    row.mean = est.mean[0];
    row.rel_se = est.stderr_[0] / std::max(std::abs(est.mean[0]), 1e-300);
    row.bound = vq.value(x);
    row.pass = row.mean <= row.bound * (1.0 + 3.0 * row.rel_se);
    rows.push_back(row);
  }
  return rows;
}

double polynomial_growth_certificate(const ProblemSpec& spec, const PointEvaluator& vg_eval,
                                     const std::vector<StateProbe>& probes, double p) {
  if (probes.empty()) throw UsageError("polynomial_growth_certificate: empty probe list");
  double worst = 0.0;
  for (const auto& probe : probes) {
    const Vec vg = vg_eval(probe.s, probe.x);
    const double scaled = vg.norm() * std::sqrt(spec.T - probe.s) /
                          std::pow(1.0 + probe.x.squaredNorm(), 0.5 * p);
    worst = std::max(worst, scaled);
  }
  return worst;
}

}  // namespace kolmo
