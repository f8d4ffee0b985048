#include "kolmo/sde.hpp"

#include <cmath>

namespace kolmo {

std::vector<Vec> sample_brownian(const TimeGrid& grid, int d, RngStream rng) {
  std::vector<Vec> incs(grid.n_steps());
  for (std::size_t k = 0; k < grid.n_steps(); ++k) {
    const double sd = std::sqrt(grid.dt(k));
    Vec w(d);
    for (int i = 0; i < d; ++i) w[i] = sd * rng.normal();
    incs[k] = std::move(w);
  }
  return incs;
}

SdePath simulate_path(const ProblemSpec& spec, const Vec& x0, const TimeGrid& grid,
                      std::vector<Vec> increments) {
  if (x0.size() != spec.d) throw UsageError("simulate_path: x0 dimension mismatch");
  if (!x0.allFinite()) throw UsageError("simulate_path: x0 not finite");
  if (increments.size() != grid.n_steps()) {
    throw UsageError("simulate_path: increment count does not match grid");
  }
  SdePath path{grid, {}, std::move(increments)};
  path.states.resize(grid.n_steps() + 1);
  path.states[0] = x0;
  for (std::size_t k = 0; k < grid.n_steps(); ++k) {
    const double t = grid.time(k);
    const Vec& x = path.states[k];
    path.states[k + 1] =
        x + spec.coeffs.mu(t, x) * grid.dt(k) + spec.coeffs.sigma(t, x) * path.dW[k];
    if (!path.states[k + 1].allFinite()) {
      throw SimulationError("simulate_path: non-finite state", k + 1);
    }
  }
  return path;
}

SdePath simulate_path(const ProblemSpec& spec, const Vec& x0, const TimeGrid& grid,
                      RngStream rng) {
  return simulate_path(spec, x0, grid, sample_brownian(grid, spec.d, rng));
}

namespace {

// Noise part of the variation update: N.col(j) = (dsigma/dx_j) dW, so that
// (N Y)_{ij} matches sum_l sum_k (dsigma_il/dx_k) Y_kj dW_l after right-multiplying.
Mat variation_noise(const ProblemSpec& spec, double t, const Vec& x, const Vec& dw) {
  const int d = spec.d;
  Mat n(d, d);
  for (int j = 0; j < d; ++j) {
    n.col(j) = spec.coeffs.jac_sigma_col(t, x, j) * dw;
  }
  return n;
}

// B_l with entries (i,k) = dsigma_il/dx_k, assembled from the per-coordinate
// derivative matrices. Used only for the Ito correction of the inverse flow.
std::vector<Mat> diffusion_direction_jacobians(const ProblemSpec& spec, double t, const Vec& x) {
  const int d = spec.d;
  std::vector<Mat> cols(d);
  for (int k = 0; k < d; ++k) cols[k] = spec.coeffs.jac_sigma_col(t, x, k);
  std::vector<Mat> b(d);
  for (int l = 0; l < d; ++l) {
    Mat bl(d, d);
    for (int i = 0; i < d; ++i) {
      for (int k = 0; k < d; ++k) bl(i, k) = cols[k](i, l);
    }
    b[l] = std::move(bl);
  }
  return b;
}

}  // namespace

VariationPath simulate_first_variation(const ProblemSpec& spec, const SdePath& path) {
  if (!spec.coeffs.has_jacobians()) {
    throw ConfigError("simulate_first_variation: coefficient Jacobians missing");
  }
  const int d = spec.d;
  VariationPath var;
  var.matrices.resize(path.states.size());
  var.matrices[0] = Mat::Identity(d, d);
  for (std::size_t k = 0; k + 1 < path.states.size(); ++k) {
    const double t = path.grid.time(k);
    const Vec& x = path.states[k];
    const Mat step = spec.coeffs.jac_mu(t, x) * path.grid.dt(k) +
                     variation_noise(spec, t, x, path.dW[k]);
    var.matrices[k + 1] = var.matrices[k] + step * var.matrices[k];
    if (!var.matrices[k + 1].allFinite()) {
      throw SimulationError("simulate_first_variation: non-finite variation", k + 1);
    }
  }
  return var;
}

VariationPath simulate_inverse_variation(const ProblemSpec& spec, const SdePath& path) {
  if (!spec.coeffs.has_jacobians()) {
    throw ConfigError("simulate_inverse_variation: coefficient Jacobians missing");
  }
  const int d = spec.d;
  VariationPath var;
  var.matrices.resize(path.states.size());
  var.matrices[0] = Mat::Identity(d, d);
  for (std::size_t k = 0; k + 1 < path.states.size(); ++k) {
    const double t = path.grid.time(k);
    const Vec& x = path.states[k];
    const std::vector<Mat> b = diffusion_direction_jacobians(spec, t, x);
    Mat ito = Mat::Zero(d, d);
    for (const Mat& bl : b) ito += bl * bl;
    const Mat drift = spec.coeffs.jac_mu(t, x) - ito;
    const Mat step = drift * path.grid.dt(k) + variation_noise(spec, t, x, path.dW[k]);
    var.matrices[k + 1] = var.matrices[k] - var.matrices[k] * step;
    if (!var.matrices[k + 1].allFinite()) {
      throw SimulationError("simulate_inverse_variation: non-finite variation", k + 1);
    }
  }
  return var;
}

Mat malliavin_derivative(const ProblemSpec& spec, const SdePath& path, const VariationPath& y,
                         const VariationPath& zinv, std::size_t t_index, std::size_t s_index) {
  if (t_index > s_index) throw UsageError("malliavin_derivative: requires t_index <= s_index");
  if (s_index >= y.matrices.size() || t_index >= zinv.matrices.size()) {
    throw UsageError("malliavin_derivative: index out of range");
  }
  const double t = path.grid.time(t_index);
  return y.matrices[s_index] * zinv.matrices[t_index] *
         spec.coeffs.sigma(t, path.states[t_index]);
}

}  // namespace kolmo
