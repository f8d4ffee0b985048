#pragma once

#include <cstddef>
#include <vector>

#include "kolmo/errors.hpp"

namespace kolmo {

/// Discretization of a horizon [t_start, t_end].
class TimeGrid {
public:
  TimeGrid(double t_start, double t_end, std::size_t n_steps) {
    if (!(t_end > t_start)) throw UsageError("TimeGrid: t_end must exceed t_start");
    if (n_steps == 0) throw UsageError("TimeGrid: n_steps must be positive");
    times_.resize(n_steps + 1);
    const double dt = (t_end - t_start) / static_cast<double>(n_steps);
    for (std::size_t k = 0; k <= n_steps; ++k) {
      times_[k] = t_start + dt * static_cast<double>(k);
    }
    times_.back() = t_end;
  }

  explicit TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) throw UsageError("TimeGrid: need at least two nodes");
    for (std::size_t k = 1; k < times_.size(); ++k) {
      if (!(times_[k] > times_[k - 1])) {
        throw UsageError("TimeGrid: times must be strictly increasing");
      }
    }
  }

  double t_start() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  std::size_t n_steps() const { return times_.size() - 1; }
  double time(std::size_t k) const { return times_[k]; }
  double dt(std::size_t k) const { return times_[k + 1] - times_[k]; }
  const std::vector<double>& times() const { return times_; }

private:
  std::vector<double> times_;
};

/// Default step count: dt <= horizon / 200 unless overridden.
inline constexpr std::size_t kDefaultGridSteps = 200;

}  // namespace kolmo
