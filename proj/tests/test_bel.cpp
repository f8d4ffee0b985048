#include <doctest.h>

#include <cmath>

#include "kolmo/bel.hpp"

using namespace kolmo;

namespace {

ProblemSpec brownian_spec(int d, double sigma_scale = 1.0, double T = 1.0) {
  ProblemSpec spec;
  spec.d = d;
  spec.T = T;
  spec.c = 0.0;
  spec.alpha = sigma_scale * sigma_scale;
  spec.coeffs.mu = [d](double, const Vec&) { return Vec(Vec::Zero(d)); };
  spec.coeffs.sigma = [sigma_scale, d](double, const Vec&) {
    return Mat(sigma_scale * Mat::Identity(d, d));
  };
  spec.coeffs.jac_mu = [d](double, const Vec&) { return Mat(Mat::Zero(d, d)); };
  spec.coeffs.jac_sigma_col = [d](double, const Vec&, int) { return Mat(Mat::Zero(d, d)); };
  return spec;
}

}  // namespace

TEST_CASE("brownian weight is exactly the normalized increment sum") {
  const ProblemSpec spec = brownian_spec(3);
  const TimeGrid grid(0.2, 1.0, 25);
  const auto path = simulate_path(spec, Vec::Zero(3), grid, make_root_stream(1).child(4));
  const auto y = simulate_first_variation(spec, path);
  const BelWeight w = bel_weight(spec, path, y, grid.n_steps());
  Vec total = Vec::Zero(3);
  for (const auto& inc : path.dW) total += inc;
  CHECK(w.value[0] == 1.0);
  CHECK((w.value.tail(3) - total / 0.8).norm() <= 1e-14);
}

TEST_CASE("leading component is exactly one on every preset weight") {
  for (auto make : {+[] { return make_heat(2); }, +[] { return make_ou_linear(2); }}) {
    const Problem prob = make();
    const TimeGrid grid(0.0, 1.0, 30);
    RngStream root = make_root_stream(2);
    for (int i = 0; i < 50; ++i) {
      const auto path = simulate_path(prob.spec, Vec::Zero(2), grid, root.child(i));
      const auto y = simulate_first_variation(prob.spec, path);
      for (std::size_t k = 5; k <= 30; k += 5) {
        CHECK(bel_weight(prob.spec, path, y, k).value[0] == 1.0);
      }
    }
  }
}

TEST_CASE("weight is mean zero in the gradient components") {
  const Problem ou = make_ou_linear(2);
  const auto report = weight_moment_report(ou.spec, (Vec(2) << 0.5, -0.2).finished(), 0.0, 1.0,
                                           100000, 50, make_root_stream(3));
  // per the martingale property of the Ito integral
  CHECK(report.mean_norm <= 4.0 * std::sqrt(report.second_moment / 100000.0));
}

TEST_CASE("second moment matches the closed form on the brownian case and is tight") {
  // sigma = I, c = 0, alpha = 1, horizon 1: bound d/(1*1^2)*1 = d and the
  // exact moment is d/(s-t) = d, so the bound is met with equality.
  const ProblemSpec spec = brownian_spec(2);
  const auto report =
      weight_moment_report(spec, Vec::Zero(2), 0.0, 1.0, 100000, 20, make_root_stream(4));
  CHECK(report.paper_bound == doctest::Approx(2.0));
  CHECK(report.pass);
  CHECK(std::abs(report.second_moment - 2.0) <= 4.0 * report.second_moment_se);

  // horizon 0.25: exact moment 4d, bound also 4d.
  const auto quarter =
      weight_moment_report(spec, Vec::Zero(2), 0.0, 0.25, 100000, 20, make_root_stream(5));
  CHECK(quarter.paper_bound == doctest::Approx(8.0));
  CHECK(quarter.pass);
  CHECK(std::abs(quarter.second_moment - 8.0) <= 4.0 * quarter.second_moment_se);
}

TEST_CASE("bound is monotone in the monotonicity constant") {
  ProblemSpec spec = brownian_spec(2);
  const double b0 = bel_weight_second_moment_bound(spec, 0.0, 1.0);
  spec.c = 1.0;
  const double b1 = bel_weight_second_moment_bound(spec, 0.0, 1.0);
  CHECK(b1 > b0);
  CHECK(b0 == doctest::Approx(2.0));
  CHECK(b1 == doctest::Approx(2.0 * (std::exp(2.0) - 1.0) / 2.0));
}

TEST_CASE("OU weight second moment matches its closed form") {
  // sigma = I and Y_r = exp(-(r-t)) I give
  // E|Z|^2 = d (1 - e^{-2 tau}) / (2 tau^2).
  const Problem ou = make_ou_linear(2);
  const double tau = 1.0;
  const auto report =
      weight_moment_report(ou.spec, Vec::Zero(2), 0.0, tau, 50000, 400, make_root_stream(6));
  const double oracle = 2.0 * (1.0 - std::exp(-2.0 * tau)) / (2.0 * tau * tau);
  CHECK(std::abs(report.second_moment - oracle) <= 4.0 * report.second_moment_se + 0.01 * oracle);
  CHECK(report.pass);  // strictly below the c = 0 bound d/tau
}

TEST_CASE("weights scale inversely with a diffusion rescaling, path by path") {
  const ProblemSpec base = brownian_spec(2);
  const ProblemSpec scaled = brownian_spec(2, 4.0);
  const TimeGrid grid(0.0, 1.0, 30);
  RngStream root = make_root_stream(7);
  for (int i = 0; i < 20; ++i) {
    const auto incs = sample_brownian(grid, 2, root.child(i));
    const auto path_b = simulate_path(base, Vec::Zero(2), grid, incs);
    const auto path_s = simulate_path(scaled, Vec::Zero(2), grid, incs);
    const auto yb = simulate_first_variation(base, path_b);
    const auto ys = simulate_first_variation(scaled, path_s);
    for (std::size_t k = 10; k <= 30; k += 10) {
      const Vec wb = bel_weight(base, path_b, yb, k).value.tail(2);
      const Vec ws = bel_weight(scaled, path_s, ys, k).value.tail(2);
      CHECK((ws - wb / 4.0).norm() <= 1e-14 * wb.norm());
    }
  }
}

TEST_CASE("second moment grows like 1/(s-t) near the start") {
  const ProblemSpec spec = brownian_spec(1);
  double prev = 0.0;
  int idx = 0;
  for (const double tau : {1.0, 0.5, 0.25}) {
    const auto report =
        weight_moment_report(spec, Vec::Zero(1), 0.0, tau, 100000, 16, make_root_stream(8 + idx));
    const double expected = 1.0 / tau;
    CHECK(std::abs(report.second_moment - expected) <= 4.0 * report.second_moment_se);
    if (idx > 0) {
      const double ratio = report.second_moment / prev;
      CHECK(ratio == doctest::Approx(2.0).epsilon(0.1));
    }
    prev = report.second_moment;
    ++idx;
  }
}

TEST_CASE("weight error paths") {
  const ProblemSpec spec = brownian_spec(1);
  const TimeGrid grid(0.0, 1.0, 10);
  const auto path = simulate_path(spec, Vec::Zero(1), grid, make_root_stream(11).child(0));
  const auto y = simulate_first_variation(spec, path);
  CHECK_THROWS_AS(bel_weight(spec, path, y, 0), UsageError);

  // horizon below the minimum guard
  const TimeGrid tiny(0.0, 1e-7, 2);
  const auto tpath = simulate_path(spec, Vec::Zero(1), tiny, make_root_stream(12).child(0));
  const auto ty = simulate_first_variation(spec, tpath);
  CHECK_THROWS_AS(bel_weight(spec, tpath, ty, 1), UsageError);

  // numerically singular diffusion
  ProblemSpec degen = brownian_spec(1);
  degen.coeffs.sigma = [](double, const Vec&) { return Mat(Mat::Zero(1, 1)); };
  const auto dpath = simulate_path(degen, Vec::Zero(1), grid, make_root_stream(13).child(0));
  const auto dy = simulate_first_variation(degen, dpath);
  CHECK_THROWS_AS(bel_weight(degen, dpath, dy, 5), EllipticityError);
}
