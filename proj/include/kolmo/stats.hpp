#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "kolmo/errors.hpp"

namespace kolmo {

/// Pairwise (tree) sum over a slice of per-sample vectors.  The reduction
/// order depends only on the slice, never on the worker layout, so estimates
/// are bit-identical for any thread count.
inline Eigen::VectorXd pairwise_sum(const std::vector<Eigen::VectorXd>& xs,
                                    std::size_t begin, std::size_t end) {
  const std::size_t n = end - begin;
  if (n == 0) throw UsageError("pairwise_sum: empty range");
  if (n <= 8) {
    Eigen::VectorXd acc = xs[begin];
    for (std::size_t i = begin + 1; i < end; ++i) acc += xs[i];
    return acc;
  }
  const std::size_t mid = begin + n / 2;
  return pairwise_sum(xs, begin, mid) + pairwise_sum(xs, mid, end);
}

inline Eigen::VectorXd pairwise_sum(const std::vector<Eigen::VectorXd>& xs) {
  return pairwise_sum(xs, 0, xs.size());
}

/// Monte-Carlo estimate of a vector-valued expectation.
struct Estimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd stderr_;  // sample std / sqrt(n), componentwise
  std::uint64_t n_samples = 0;

  double value() const { return mean[0]; }
};

/// Mean and standard error from per-sample values, deterministic order.
inline Estimate reduce_samples(const std::vector<Eigen::VectorXd>& samples) {
  if (samples.empty()) throw UsageError("reduce_samples: no samples");
  const auto n = static_cast<std::uint64_t>(samples.size());
  Estimate est;
  est.n_samples = n;
  est.mean = pairwise_sum(samples) / static_cast<double>(n);
  if (n == 1) {
    est.stderr_ = Eigen::VectorXd::Zero(est.mean.size());
    return est;
  }
  std::vector<Eigen::VectorXd> sq(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Eigen::VectorXd dev = samples[i] - est.mean;
    sq[i] = dev.cwiseProduct(dev);
  }
  const Eigen::VectorXd ssq = pairwise_sum(sq);
  est.stderr_ = (ssq / static_cast<double>(n - 1) / static_cast<double>(n)).cwiseSqrt();
  return est;
}

inline Estimate reduce_scalar_samples(const std::vector<double>& values) {
  std::vector<Eigen::VectorXd> v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    v[i] = Eigen::VectorXd::Constant(1, values[i]);
  }
  return reduce_samples(v);
}

}  // namespace kolmo
