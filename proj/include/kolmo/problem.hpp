#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kolmo/errors.hpp"
#include "kolmo/rng.hpp"

namespace kolmo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using DriftFn = std::function<Vec(double, const Vec&)>;
using DiffusionFn = std::function<Mat(double, const Vec&)>;
using JacDriftFn = std::function<Mat(double, const Vec&)>;
// d(sigma)/d(x_j): derivative of the whole matrix w.r.t. coordinate j.
using JacDiffusionFn = std::function<Mat(double, const Vec&, int)>;
// f(t, x, a, w) with a the value and w the spatial gradient argument.
using NonlinearityFn = std::function<double(double, const Vec&, double, const Vec&)>;
using TerminalFn = std::function<double(const Vec&)>;
using SourceFn = std::function<double(double, const Vec&)>;

/// Drift/diffusion fields with their spatial Jacobians.
struct CoefficientField {
  DriftFn mu;
  DiffusionFn sigma;
  JacDriftFn jac_mu;            // (i,k) = d mu_i / d x_k
  JacDiffusionFn jac_sigma_col; // (i,l) = d sigma_il / d x_j for given j

  bool has_jacobians() const { return static_cast<bool>(jac_mu) && static_cast<bool>(jac_sigma_col); }

  /// Central finite-difference Jacobians, step sqrt(eps)*(1+|x|).
  static CoefficientField with_fd_jacobians(DriftFn mu, DiffusionFn sigma);
};

/// Axis-aligned box from which condition probes are drawn.
struct ProbeBox {
  Vec lo;
  Vec hi;
};

/// One PDE/SDE instance together with its declared structural constants.
struct ProblemSpec {
  int d = 0;
  double T = 0.0;
  CoefficientField coeffs;
  NonlinearityFn f;
  TerminalFn g;
  double c = 0.0;           // monotonicity constant of drift/diffusion
  double growth_c = 0.0;    // coercivity: max{<x,mu>, |sigma|_F^2} <= growth_c (1+|x|^2)
  double alpha = 0.0;       // ellipticity constant
  double lipschitz_L = 0.0; // Lipschitz constant of f in (a, w)
  double growth_p = 1.0;    // polynomial growth exponent of g, f(.,.,0,0)
  ProbeBox probe_box;
  std::string name;

  /// Scalar invariants plus a finite-difference cross-check of the supplied
  /// Jacobians at a few random probes.  Throws ConfigError on failure.
  void validate(RngStream rng, int n_probes = 16, double tol = 1e-5) const;
};

/// V_q(x) = (1 + |x|^2)^(q/2) with closed-form derivatives.
class LyapunovVq {
public:
  explicit LyapunovVq(double q);
  double q() const { return q_; }
  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;

private:
  double q_;
};

/// Outcome of one structural-condition probe sweep.
struct ConditionReport {
  std::string condition;
  bool pass = false;
  double bound = 0.0;     // declared constant the observation is held against
  double observed = 0.0;  // worst statistic over the probes
  double implied = 0.0;   // smallest constant that would have passed
  std::size_t n_probes = 0;
  double tolerance = 0.0;
};

struct MonotonicityProbe {
  double s;
  Vec x;
  Vec y;
};
struct EllipticityProbe {
  double s;
  Vec x;
  Vec v;
};
struct LipschitzProbe {
  double t;
  Vec x;
  double a1;
  Vec w1;
  double a2;
  Vec w2;
};
struct StateProbe {
  double s;
  Vec x;
};

inline constexpr double kConditionTol = 1e-8;

// max over probes of <x-y, mu(x)-mu(y)> / |x-y|^2 and (1/2)|sigma(x)-sigma(y)|_F^2 / |x-y|^2,
// both held against c/2.
ConditionReport check_monotonicity(const CoefficientField& coeffs, double c,
                                   const std::vector<MonotonicityProbe>& probes,
                                   double tol = kConditionTol);

// min over probes of v* sigma sigma* v / |v|^2 held against alpha.
ConditionReport check_ellipticity(const CoefficientField& coeffs, double alpha,
                                  const std::vector<EllipticityProbe>& probes,
                                  double tol = kConditionTol);

// max Lipschitz quotient of f in (a, w) held against L.
ConditionReport check_lipschitz_f(const ProblemSpec& spec,
                                  const std::vector<LipschitzProbe>& probes,
                                  double tol = kConditionTol);

// Generator bounds on V_q: both the squared-gradient variant and the
// +L|grad V_q| variant must stay below rho * V_q at every probe.
ConditionReport check_lyapunov_vq(const ProblemSpec& spec, const LyapunovVq& vq, double rho,
                                  const std::vector<StateProbe>& probes,
                                  double tol = kConditionTol);

// Coercivity sweep for growth_c: max{<x,mu>, |sigma|_F^2} / (1+|x|^2).
ConditionReport check_growth(const ProblemSpec& spec, const std::vector<StateProbe>& probes,
                             double tol = kConditionTol);

std::vector<MonotonicityProbe> make_monotonicity_probes(const ProblemSpec& spec, std::size_t n,
                                                        RngStream rng);
std::vector<EllipticityProbe> make_ellipticity_probes(const ProblemSpec& spec, std::size_t n,
                                                      RngStream rng);
std::vector<LipschitzProbe> make_lipschitz_probes(const ProblemSpec& spec, std::size_t n,
                                                  RngStream rng);
std::vector<StateProbe> make_state_probes(const ProblemSpec& spec, std::size_t n, RngStream rng);

/// Closed-form reference solution carried by presets that have one.
struct AnalyticSolution {
  std::function<double(double, const Vec&)> value;
  std::function<Vec(double, const Vec&)> gradient;
  /// (d+1)-vector [value; gradient].
  Vec value_gradient(double t, const Vec& x) const {
    Vec out(x.size() + 1);
    out[0] = value(t, x);
    out.tail(x.size()) = gradient(t, x);
    return out;
  }
};

/// A problem plus (when available) its closed-form solution.
struct Problem {
  ProblemSpec spec;
  std::optional<AnalyticSolution> analytic;
};

struct ManufacturedShape {
  double sigma_scale = 1.0;  // sigma = sigma_scale * I, mu = 0
};

/// Method of manufactured solutions around u(t,x) = exp(-(T-t)) / (1+|x|^2):
/// the source absorbs everything so that f(t,x,a,w) = s0 + lambda*a + <kappa,w>
/// makes u solve the PDE exactly.  Lipschitz constant of f is |(lambda,kappa)|.
Problem manufactured_problem(int d, double T, double lambda, const Vec& kappa,
                             const ManufacturedShape& shape = {});

Problem make_heat(int d, double T = 1.0);
Problem make_ou_linear(int d, double T = 1.0);
Problem make_gbm_1d(double a = 1.0, double b = 0.1, double T = 1.0);

/// Named presets: "heat", "ou-linear", "gbm-1d", "manufactured-d{1,2,5,10}".
Problem make_preset(const std::string& name, int d = 0);

}  // namespace kolmo
