#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kolmo/picard.hpp"

namespace kolmo {

struct FdSteps {
  double h_t = 1e-3;  // absolute time step (scaled by T at call sites)
  double h_x = 1e-3;  // space step, scaled by (1 + |x|) per probe
};

/// Central-difference PDE residual of a candidate (value, gradient) field:
/// dt u + <mu, grad u> + 1/2 Tr(sigma sigma* Hess u) + f(t, x, u, grad u).
/// The gradient is taken from the evaluator when finite, else differenced.
/// `scale` per probe is the sum of the term magnitudes; passing means
/// |residual| <= rel_tolerance * scale + 3 * stderr.
ResidualReport pde_residual(const ProblemSpec& spec, const PointEvaluator& u_eval,
                            const std::vector<StateProbe>& probes, FdSteps fd = {},
                            double rel_tolerance = 1e-4,
                            const PointEvaluator& stderr_eval = nullptr);

struct CrosscheckReport {
  double t = 0.0;
  Vec x;
  Vec bel;       // BEL gradient estimate
  Vec bel_se;
  Vec fd;        // bump-and-revalue gradient, common random numbers
  Vec fd_se;
  double scale = 0.0;  // |fd| used for the relative branch of the tolerance
  bool pass = false;
};

/// BEL gradient against central finite differences of the plain value
/// estimator with common random numbers.
CrosscheckReport gradient_crosscheck(const ProblemSpec& spec, double t, const Vec& x,
                                     const TerminalFn& payoff, const McConfig& mc, RngStream rng,
                                     double fd_step = 1e-2, double rel_tolerance = 2e-2);

enum class ConvergenceAxis { NPaths, GridSteps, Depth };

struct ConvergenceRow {
  double axis_value = 0.0;
  Vec estimate;      // (d+1) value/gradient estimate
  Vec stderr_;
  double error = -1.0;  // vs oracle when available, else -1
  double seconds = 0.0;
};

struct ConvergenceStudyConfig {
  McConfig mc;                 // base MC settings (n_paths / grid_steps axes)
  PicardConfig picard;         // base Picard settings (depth axis)
  std::optional<AnalyticSolution> oracle;
};

std::vector<ConvergenceRow> convergence_study(const ProblemSpec& spec, double t, const Vec& x,
                                              ConvergenceAxis axis,
                                              const std::vector<std::uint64_t>& values,
                                              const ConvergenceStudyConfig& cfg, RngStream rng);

struct MomentCertRow {
  double horizon = 0.0;     // s - t
  double mean = 0.0;        // MC mean of exp(-rho (s-t)) V_q(X_s)
  double rel_se = 0.0;
  double bound = 0.0;       // V_q(x)
  bool pass = false;
};

/// Discounted Lyapunov moments against the supermartingale bound at a family
/// of horizons.
std::vector<MomentCertRow> moment_certificates(const ProblemSpec& spec, const LyapunovVq& vq,
                                               double rho, double t, const Vec& x,
                                               const std::vector<double>& horizons,
                                               std::uint64_t n_paths, std::size_t grid_steps,
                                               RngStream rng, unsigned threads = 0);

/// Max over probes of |vg(t,x)| sqrt(T-t) / (1+|x|^2)^(p/2): the scaled growth
/// statistic that must stay bounded for the solved pair.
double polynomial_growth_certificate(const ProblemSpec& spec, const PointEvaluator& vg_eval,
                                     const std::vector<StateProbe>& probes, double p);

}  // namespace kolmo
