#pragma once

#include <vector>

#include "kolmo/problem.hpp"
#include "kolmo/rng.hpp"
#include "kolmo/time_grid.hpp"

namespace kolmo {

/// Discretized trajectory together with the Brownian increments that drove it.
struct SdePath {
  TimeGrid grid;
  std::vector<Vec> states;  // n_steps + 1 entries, states[0] = x0
  std::vector<Vec> dW;      // n_steps entries, increment k ~ N(0, dt_k I)
};

/// Trajectory of d x d matrices on the same grid as the path.
struct VariationPath {
  std::vector<Mat> matrices;  // n_steps + 1 entries, matrices[0] = I
};

/// Independent N(0, dt_k I) increments; pure function of (grid, d, stream).
std::vector<Vec> sample_brownian(const TimeGrid& grid, int d, RngStream rng);

/// Euler-Maruyama for dX = mu dt + sigma dW with supplied increments.
SdePath simulate_path(const ProblemSpec& spec, const Vec& x0, const TimeGrid& grid,
                      std::vector<Vec> increments);

/// Convenience overload drawing the increments from `rng`.
SdePath simulate_path(const ProblemSpec& spec, const Vec& x0, const TimeGrid& grid,
                      RngStream rng);

/// First-variation process Y = dX/dx0 along the path, reusing its increments:
/// dY = (dmu/dx) Y dt + sum_l (dsigma_.l/dx) Y dW^l, Y_0 = I.
VariationPath simulate_first_variation(const ProblemSpec& spec, const SdePath& path);

/// Inverse-variation process with the Ito correction term, Z_0 = I.  The
/// product Z_k Y_k tracks the identity to O(dt).
VariationPath simulate_inverse_variation(const ProblemSpec& spec, const SdePath& path);

/// Malliavin derivative D_t X_s = Y_s Y_t^{-1} sigma(t, X_t) with Zinv standing
/// in for Y^{-1}.  Requires t_index <= s_index.
Mat malliavin_derivative(const ProblemSpec& spec, const SdePath& path, const VariationPath& y,
                         const VariationPath& zinv, std::size_t t_index, std::size_t s_index);

}  // namespace kolmo
