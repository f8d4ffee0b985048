#include "kolmo/problem.hpp"

#include <cmath>
#include <limits>

namespace kolmo {

namespace {

double fd_step(const Vec& x) {
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  return sqrt_eps * (1.0 + x.norm());
}

Vec uniform_in_box(const ProbeBox& box, RngStream& rng) {
  Vec x(box.lo.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * rng.uniform();
  }
  return x;
}

NonlinearityFn zero_nonlinearity() {
  return [](double, const Vec&, double, const Vec&) { return 0.0; };
}

}  // namespace

CoefficientField CoefficientField::with_fd_jacobians(DriftFn mu, DiffusionFn sigma) {
  CoefficientField field;
  field.mu = mu;
  field.sigma = sigma;
  field.jac_mu = [mu](double s, const Vec& x) {
    const double h = fd_step(x);
    Mat jac(x.size(), x.size());
    Vec xp = x, xm = x;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      xp[k] = x[k] + h;
      xm[k] = x[k] - h;
      jac.col(k) = (mu(s, xp) - mu(s, xm)) / (2.0 * h);
      xp[k] = x[k];
      xm[k] = x[k];
    }
    return jac;
  };
  field.jac_sigma_col = [sigma](double s, const Vec& x, int j) {
    const double h = fd_step(x);
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    return Mat(((sigma(s, xp) - sigma(s, xm)) / (2.0 * h)).eval());
  };
  return field;
}

void ProblemSpec::validate(RngStream rng, int n_probes, double tol) const {
  if (d <= 0) throw ConfigError(name + ": dimension must be positive");
  if (!(T > 0.0)) throw ConfigError(name + ": horizon T must be positive");
  if (!(alpha > 0.0)) throw ConfigError(name + ": ellipticity alpha must be positive");
  if (!(lipschitz_L > 0.0)) throw ConfigError(name + ": lipschitz_L must be positive");
  if (c < 0.0) throw ConfigError(name + ": monotonicity constant c must be nonnegative");
  if (growth_c < 0.0) throw ConfigError(name + ": growth_c must be nonnegative");
  if (!(growth_p > 0.0)) throw ConfigError(name + ": growth_p must be positive");
  if (!coeffs.mu || !coeffs.sigma) throw ConfigError(name + ": drift/diffusion missing");
  if (!coeffs.has_jacobians()) throw ConfigError(name + ": coefficient Jacobians missing");
  if (probe_box.lo.size() != d || probe_box.hi.size() != d) {
    throw ConfigError(name + ": probe box dimension mismatch");
  }

  // Cross-validate the supplied Jacobians against central differences.
  const CoefficientField fd = CoefficientField::with_fd_jacobians(coeffs.mu, coeffs.sigma);
  for (int p = 0; p < n_probes; ++p) {
    const double s = T * rng.uniform();
    const Vec x = uniform_in_box(probe_box, rng);
    const Mat jm = coeffs.jac_mu(s, x);
    const Mat jm_fd = fd.jac_mu(s, x);
    const double scale_m = 1.0 + jm_fd.norm();
    if ((jm - jm_fd).norm() > tol * scale_m) {
      throw ConfigError(name + ": jac_mu disagrees with finite differences");
    }
    for (int j = 0; j < d; ++j) {
      const Mat js = coeffs.jac_sigma_col(s, x, j);
      const Mat js_fd = fd.jac_sigma_col(s, x, j);
      const double scale_s = 1.0 + js_fd.norm();
      if ((js - js_fd).norm() > tol * scale_s) {
        throw ConfigError(name + ": jac_sigma_col disagrees with finite differences");
      }
    }
  }
}

LyapunovVq::LyapunovVq(double q) : q_(q) {
  if (!(q > 0.0)) throw UsageError("LyapunovVq: exponent q must be positive");
}

double LyapunovVq::value(const Vec& x) const {
  return std::pow(1.0 + x.squaredNorm(), 0.5 * q_);
}

Vec LyapunovVq::gradient(const Vec& x) const {
  const double w = 1.0 + x.squaredNorm();
  return q_ * std::pow(w, 0.5 * q_ - 1.0) * x;
}

Mat LyapunovVq::hessian(const Vec& x) const {
  const double w = 1.0 + x.squaredNorm();
  const Eigen::Index n = x.size();
  Mat h = q_ * std::pow(w, 0.5 * q_ - 1.0) * Mat::Identity(n, n);
  h += q_ * (q_ - 2.0) * std::pow(w, 0.5 * q_ - 2.0) * (x * x.transpose());
  return h;
}

ConditionReport check_monotonicity(const CoefficientField& coeffs, double c,
                                   const std::vector<MonotonicityProbe>& probes, double tol) {
  if (probes.empty()) throw UsageError("check_monotonicity: empty probe list");
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : probes) {
    const Vec diff = p.x - p.y;
    const double nn = diff.squaredNorm();
    if (nn == 0.0) throw UsageError("check_monotonicity: coincident probe x = y");
    const double drift_q = diff.dot(coeffs.mu(p.s, p.x) - coeffs.mu(p.s, p.y)) / nn;
    const double diff_q = 0.5 * (coeffs.sigma(p.s, p.x) - coeffs.sigma(p.s, p.y)).squaredNorm() / nn;
    worst = std::max(worst, std::max(drift_q, diff_q));
  }
  ConditionReport r;
  r.condition = "monotonicity";
  r.bound = 0.5 * c;
  r.observed = worst;
  r.implied = 2.0 * worst;
  r.n_probes = probes.size();
  r.tolerance = tol;
  r.pass = worst <= 0.5 * c + tol;
  return r;
}

ConditionReport check_ellipticity(const CoefficientField& coeffs, double alpha,
                                  const std::vector<EllipticityProbe>& probes, double tol) {
  if (probes.empty()) throw UsageError("check_ellipticity: empty probe list");
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& p : probes) {
    const double vv = p.v.squaredNorm();
    if (vv == 0.0) throw UsageError("check_ellipticity: zero test vector");
    const Mat s = coeffs.sigma(p.s, p.x);
    const double quad = (s.transpose() * p.v).squaredNorm() / vv;
    worst = std::min(worst, quad);
  }
  ConditionReport r;
  r.condition = "ellipticity";
  r.bound = alpha;
  r.observed = worst;
  r.implied = worst;
  r.n_probes = probes.size();
  r.tolerance = tol;
  r.pass = worst >= alpha - tol;
  return r;
}

ConditionReport check_lipschitz_f(const ProblemSpec& spec,
                                  const std::vector<LipschitzProbe>& probes, double tol) {
  if (probes.empty()) throw UsageError("check_lipschitz_f: empty probe list");
  double worst = 0.0;
  for (const auto& p : probes) {
    const double da = p.a1 - p.a2;
    const double dw2 = da * da + (p.w1 - p.w2).squaredNorm();
    if (dw2 == 0.0) throw UsageError("check_lipschitz_f: coincident (a, w) probe");
    const double gap =
        std::abs(spec.f(p.t, p.x, p.a1, p.w1) - spec.f(p.t, p.x, p.a2, p.w2));
    worst = std::max(worst, gap / std::sqrt(dw2));
  }
  ConditionReport r;
  r.condition = "lipschitz_f";
  r.bound = spec.lipschitz_L;
  r.observed = worst;
  r.implied = worst;
  r.n_probes = probes.size();
  r.tolerance = tol;
  r.pass = worst <= spec.lipschitz_L + tol;
  return r;
}

ConditionReport check_lyapunov_vq(const ProblemSpec& spec, const LyapunovVq& vq, double rho,
                                  const std::vector<StateProbe>& probes, double tol) {
  if (probes.empty()) throw UsageError("check_lyapunov_vq: empty probe list");
  double implied = -std::numeric_limits<double>::infinity();
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (const auto& p : probes) {
    const double v = vq.value(p.x);
    if (!(v > 0.0)) throw Error("check_lyapunov_vq: V_q evaluated nonpositive");
    const Vec grad = vq.gradient(p.x);
    const Mat hess = vq.hessian(p.x);
    const Mat sig = spec.coeffs.sigma(p.s, p.x);
    const Vec mu = spec.coeffs.mu(p.s, p.x);
    const double generator =
        mu.dot(grad) + 0.5 * ((sig * sig.transpose()).cwiseProduct(hess)).sum();
    const double quad_term = 0.5 * (sig.transpose() * grad).squaredNorm() / v;
    const double lip_term = spec.lipschitz_L * grad.norm();
    const double lhs = std::max(generator + quad_term, generator + lip_term);
    implied = std::max(implied, lhs / v);
    worst_excess = std::max(worst_excess, lhs - rho * v);
  }
  ConditionReport r;
  r.condition = "lyapunov_vq";
  r.bound = rho;
  r.observed = implied;
  r.implied = implied;
  r.n_probes = probes.size();
  r.tolerance = tol;
  r.pass = worst_excess <= tol;
  return r;
}

ConditionReport check_growth(const ProblemSpec& spec, const std::vector<StateProbe>& probes,
                             double tol) {
  if (probes.empty()) throw UsageError("check_growth: empty probe list");
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : probes) {
    const double w = 1.0 + p.x.squaredNorm();
    const double drift_q = p.x.dot(spec.coeffs.mu(p.s, p.x)) / w;
    const double diff_q = spec.coeffs.sigma(p.s, p.x).squaredNorm() / w;
    worst = std::max(worst, std::max(drift_q, diff_q));
  }
  ConditionReport r;
  r.condition = "growth";
  r.bound = spec.growth_c;
  r.observed = worst;
  r.implied = worst;
  r.n_probes = probes.size();
  r.tolerance = tol;
  r.pass = worst <= spec.growth_c + tol;
  return r;
}

std::vector<MonotonicityProbe> make_monotonicity_probes(const ProblemSpec& spec, std::size_t n,
                                                        RngStream rng) {
  std::vector<MonotonicityProbe> probes;
  probes.reserve(n);
  while (probes.size() < n) {
    MonotonicityProbe p;
    p.s = spec.T * rng.uniform();
    p.x = uniform_in_box(spec.probe_box, rng);
    p.y = uniform_in_box(spec.probe_box, rng);
    if ((p.x - p.y).squaredNorm() == 0.0) continue;
    probes.push_back(std::move(p));
  }
  return probes;
}

std::vector<EllipticityProbe> make_ellipticity_probes(const ProblemSpec& spec, std::size_t n,
                                                      RngStream rng) {
  std::vector<EllipticityProbe> probes;
  probes.reserve(n);
  while (probes.size() < n) {
    EllipticityProbe p;
    p.s = spec.T * rng.uniform();
    p.x = uniform_in_box(spec.probe_box, rng);
    p.v = Vec(spec.d);
    for (int i = 0; i < spec.d; ++i) p.v[i] = rng.normal();
    if (p.v.squaredNorm() == 0.0) continue;
    probes.push_back(std::move(p));
  }
  return probes;
}

std::vector<LipschitzProbe> make_lipschitz_probes(const ProblemSpec& spec, std::size_t n,
                                                  RngStream rng) {
  std::vector<LipschitzProbe> probes;
  probes.reserve(n);
  while (probes.size() < n) {
    LipschitzProbe p;
    p.t = spec.T * rng.uniform();
    p.x = uniform_in_box(spec.probe_box, rng);
    p.a1 = 6.0 * rng.uniform() - 3.0;
    p.a2 = 6.0 * rng.uniform() - 3.0;
    p.w1 = Vec(spec.d);
    p.w2 = Vec(spec.d);
    for (int i = 0; i < spec.d; ++i) {
      p.w1[i] = 6.0 * rng.uniform() - 3.0;
      p.w2[i] = 6.0 * rng.uniform() - 3.0;
    }
    const double da = p.a1 - p.a2;
    if (da * da + (p.w1 - p.w2).squaredNorm() == 0.0) continue;
    probes.push_back(std::move(p));
  }
  return probes;
}

std::vector<StateProbe> make_state_probes(const ProblemSpec& spec, std::size_t n, RngStream rng) {
  std::vector<StateProbe> probes;
  probes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    StateProbe p;
    p.s = spec.T * rng.uniform();
    p.x = uniform_in_box(spec.probe_box, rng);
    probes.push_back(std::move(p));
  }
  return probes;
}

namespace {

ProbeBox centered_box(int d, double radius) {
  ProbeBox box;
  box.lo = Vec::Constant(d, -radius);
  box.hi = Vec::Constant(d, radius);
  return box;
}

struct ConstDiffusionField {
  static CoefficientField make(DriftFn mu, JacDriftFn jac_mu, double sigma_scale, int d) {
    CoefficientField field;
    field.mu = std::move(mu);
    field.sigma = [sigma_scale, d](double, const Vec&) {
      return Mat(sigma_scale * Mat::Identity(d, d));
    };
    field.jac_mu = std::move(jac_mu);
    field.jac_sigma_col = [d](double, const Vec&, int) { return Mat(Mat::Zero(d, d)); };
    return field;
  }
};

/// Gaussian terminal data g(x) = exp(-|x|^2/2) pushed through a constant
/// diffusion of scale s: X_T ~ N(m, s^2 tau I) gives a closed-form value.
double gauss_value(const Vec& mean, double var) {
  const double w = 1.0 + var;
  return std::pow(w, -0.5 * static_cast<double>(mean.size())) *
         std::exp(-mean.squaredNorm() / (2.0 * w));
}

}  // namespace

Problem manufactured_problem(int d, double T, double lambda, const Vec& kappa,
                             const ManufacturedShape& shape) {
  if (d <= 0) throw UsageError("manufactured_problem: d must be positive");
  if (kappa.size() != d) throw UsageError("manufactured_problem: kappa dimension mismatch");
  const double s2 = shape.sigma_scale * shape.sigma_scale;

  auto value = [T](double t, const Vec& x) {
    return std::exp(-(T - t)) / (1.0 + x.squaredNorm());
  };
  auto gradient = [T](double t, const Vec& x) {
    const double w = 1.0 + x.squaredNorm();
    return Vec(-2.0 * std::exp(-(T - t)) / (w * w) * x);
  };
  // time derivative equals the value itself; Laplacian in closed form
  auto laplacian = [T, d](double t, const Vec& x) {
    const double w = 1.0 + x.squaredNorm();
    const double r2 = x.squaredNorm();
    return std::exp(-(T - t)) * (-2.0 * d / (w * w) + 8.0 * r2 / (w * w * w));
  };

  SourceFn source = [=](double t, const Vec& x) {
    const double u = value(t, x);
    const double dtu = u;
    return -dtu - 0.5 * s2 * laplacian(t, x) - lambda * u - kappa.dot(gradient(t, x));
  };

  Problem prob;
  prob.spec.d = d;
  prob.spec.T = T;
  prob.spec.coeffs = ConstDiffusionField::make(
      [d](double, const Vec&) { return Vec(Vec::Zero(d)); },
      [d](double, const Vec&) { return Mat(Mat::Zero(d, d)); }, shape.sigma_scale, d);
  prob.spec.f = [source, lambda, kappa](double t, const Vec& x, double a, const Vec& w) {
    return source(t, x) + lambda * a + kappa.dot(w);
  };
  prob.spec.g = [](const Vec& x) { return 1.0 / (1.0 + x.squaredNorm()); };
  prob.spec.c = 0.0;
  prob.spec.growth_c = s2 * d;
  prob.spec.alpha = s2;
  prob.spec.lipschitz_L =
      std::max(std::sqrt(lambda * lambda + kappa.squaredNorm()), 1e-12);
  prob.spec.growth_p = 1.0;
  prob.spec.probe_box = centered_box(d, 2.0);
  prob.spec.name = "manufactured-d" + std::to_string(d);

  AnalyticSolution sol;
  sol.value = value;
  sol.gradient = gradient;
  prob.analytic = std::move(sol);
  return prob;
}

Problem make_heat(int d, double T) {
  const double s2 = 2.0;  // sigma = sqrt(2) I
  Problem prob;
  prob.spec.d = d;
  prob.spec.T = T;
  prob.spec.coeffs = ConstDiffusionField::make(
      [d](double, const Vec&) { return Vec(Vec::Zero(d)); },
      [d](double, const Vec&) { return Mat(Mat::Zero(d, d)); }, std::sqrt(s2), d);
  prob.spec.f = zero_nonlinearity();
  prob.spec.g = [](const Vec& x) { return std::exp(-0.5 * x.squaredNorm()); };
  prob.spec.c = 0.0;
  prob.spec.growth_c = s2 * d;
  prob.spec.alpha = s2;
  prob.spec.lipschitz_L = 1e-9;
  prob.spec.growth_p = 1.0;
  prob.spec.probe_box = centered_box(d, 2.0);
  prob.spec.name = "heat";

  AnalyticSolution sol;
  sol.value = [T, s2](double t, const Vec& x) { return gauss_value(x, s2 * (T - t)); };
  sol.gradient = [T, s2](double t, const Vec& x) {
    const double w = 1.0 + s2 * (T - t);
    return Vec(-gauss_value(x, s2 * (T - t)) / w * x);
  };
  prob.analytic = std::move(sol);
  return prob;
}

Problem make_ou_linear(int d, double T) {
  Problem prob;
  prob.spec.d = d;
  prob.spec.T = T;
  prob.spec.coeffs = ConstDiffusionField::make(
      [](double, const Vec& x) { return Vec(-x); },
      [d](double, const Vec&) { return Mat(-Mat::Identity(d, d)); }, 1.0, d);
  prob.spec.f = zero_nonlinearity();
  prob.spec.g = [](const Vec& x) { return std::exp(-0.5 * x.squaredNorm()); };
  prob.spec.c = 0.0;
  prob.spec.growth_c = static_cast<double>(d);
  prob.spec.alpha = 1.0;
  prob.spec.lipschitz_L = 1e-9;
  prob.spec.growth_p = 1.0;
  prob.spec.probe_box = centered_box(d, 2.0);
  prob.spec.name = "ou-linear";

  AnalyticSolution sol;
  sol.value = [T](double t, const Vec& x) {
    const double tau = T - t;
    const double decay = std::exp(-tau);
    const double var = 0.5 * (1.0 - std::exp(-2.0 * tau));
    return gauss_value(Vec(decay * x), var);
  };
  sol.gradient = [T](double t, const Vec& x) {
    const double tau = T - t;
    const double decay = std::exp(-tau);
    const double var = 0.5 * (1.0 - std::exp(-2.0 * tau));
    const double w = 1.0 + var;
    return Vec(-gauss_value(Vec(decay * x), var) * decay * decay / w * x);
  };
  prob.analytic = std::move(sol);
  return prob;
}

Problem make_gbm_1d(double a, double b, double T) {
  Problem prob;
  prob.spec.d = 1;
  prob.spec.T = T;
  CoefficientField field;
  field.mu = [a](double, const Vec& x) { return Vec(a * x); };
  field.sigma = [b](double, const Vec& x) { return Mat(b * x[0] * Mat::Identity(1, 1)); };
  field.jac_mu = [a](double, const Vec&) { return Mat(a * Mat::Identity(1, 1)); };
  field.jac_sigma_col = [b](double, const Vec&, int) { return Mat(b * Mat::Identity(1, 1)); };
  prob.spec.coeffs = std::move(field);
  prob.spec.f = zero_nonlinearity();
  prob.spec.g = [](const Vec& x) { return x[0]; };
  prob.spec.c = std::max(2.0 * a, b * b);
  prob.spec.growth_c = std::max(a, b * b);
  prob.spec.alpha = b * b * 0.04;  // valid on the probe box x >= 0.2
  prob.spec.lipschitz_L = 1e-9;
  prob.spec.growth_p = 1.0;
  prob.spec.probe_box = ProbeBox{Vec::Constant(1, 0.2), Vec::Constant(1, 3.0)};
  prob.spec.name = "gbm-1d";
  return prob;
}

Problem make_preset(const std::string& name, int d) {
  const int dim = d > 0 ? d : 1;
  if (name == "heat") return make_heat(dim);
  if (name == "ou-linear") return make_ou_linear(dim);
  if (name == "gbm-1d") return make_gbm_1d();
  if (name.rfind("manufactured-d", 0) == 0) {
    const std::string tail = name.substr(std::string("manufactured-d").size());
    int md = 0;
    try {
      md = std::stoi(tail);
    } catch (...) {
      throw ConfigError("unknown preset: " + name);
    }
    if (md != 1 && md != 2 && md != 5 && md != 10) {
      throw ConfigError("unknown preset: " + name);
    }
    Vec kappa = Vec::Zero(md);
    kappa[0] = 0.3;
    return manufactured_problem(md, 0.5, 0.5, kappa);
  }
  throw ConfigError("unknown preset: " + name);
}

}  // namespace kolmo
