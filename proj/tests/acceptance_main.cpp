// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Expects the CLI binary path as argv[1] (used by the determinism
// criterion).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "kolmo/verification.hpp"

using namespace kolmo;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
  std::cout.flush();
  if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Vec query_point(int d) {
  Vec x(d);
  const double pattern[] = {0.5, -0.3, 0.2, -0.1, 0.4, 0.1, -0.2, 0.3, -0.4, 0.25};
  for (int i = 0; i < d; ++i) x[i] = pattern[i % 10];
  return x;
}

ProblemSpec brownian_unit(int d) {
  ProblemSpec spec;
  spec.d = d;
  spec.T = 1.0;
  spec.c = 0.0;
  spec.alpha = 1.0;
  spec.coeffs.mu = [d](double, const Vec&) { return Vec(Vec::Zero(d)); };
  spec.coeffs.sigma = [d](double, const Vec&) { return Mat(Mat::Identity(d, d)); };
  spec.coeffs.jac_mu = [d](double, const Vec&) { return Mat(Mat::Zero(d, d)); };
  spec.coeffs.jac_sigma_col = [d](double, const Vec&, int) { return Mat(Mat::Zero(d, d)); };
  return spec;
}

// ---- criterion 1: BEL gradient identity on the heat preset -----------------

void criterion_bel_identity() {
  bool pass = true;
  std::ostringstream detail;
  for (const int d : {1, 2, 5}) {
    const auto start = std::chrono::steady_clock::now();
    const Problem heat = make_heat(d);
    const Vec x = query_point(d);
    McConfig mc;
    mc.n_paths = 100000;
    mc.grid_steps = 50;
    const Estimate est =
        estimate_gradient_bel(heat.spec, 0.0, x, heat.spec.g, mc, make_root_stream(1001 + d));
    const Vec oracle = heat.analytic->gradient(0.0, x);
    const double scale = oracle.norm();
    double worst = 0.0;
    for (int j = 0; j < d; ++j) {
      const double gap = std::abs(est.mean[j] - oracle[j]);
      const double tol = std::max(3.0 * est.stderr_[j], 0.02 * scale);
      worst = std::max(worst, gap / tol);
    }
    const double elapsed = seconds_since(start);
    if (worst > 1.0 || elapsed >= 30.0) pass = false;
    detail << "d=" << d << " gap/tol=" << std::round(worst * 100) / 100 << " ("
           << std::round(elapsed * 10) / 10 << "s) ";
  }
  report("AC1 BEL gradient identity (heat, d=1,2,5)", pass, detail.str());
}

// ---- criterion 2: weight second-moment bound --------------------------------

void criterion_weight_moment_bound() {
  bool pass = true;
  std::ostringstream detail;
  // Brownian: bound d/(s-t) met with equality.
  const ProblemSpec bm = brownian_unit(2);
  int seed = 0;
  for (const double tau : {0.25, 0.5, 1.0}) {
    const auto rep = weight_moment_report(bm, Vec::Zero(2), 0.0, tau, 100000, 40,
                                          make_root_stream(1100 + seed++));
    const bool below = rep.second_moment <= rep.paper_bound + 3.0 * rep.second_moment_se;
    const bool tight = std::abs(rep.second_moment - rep.paper_bound) <=
                       std::max(4.0 * rep.second_moment_se, 0.01 * rep.paper_bound);
    if (!below || !tight) pass = false;
    detail << "bm tau=" << tau << " m2=" << std::round(rep.second_moment * 1000) / 1000
           << " bound=" << rep.paper_bound << " ";
  }
  const Problem ou = make_ou_linear(2);
  for (const double tau : {0.25, 0.5, 1.0}) {
    const auto rep = weight_moment_report(ou.spec, Vec::Zero(2), 0.0, tau, 100000, 200,
                                          make_root_stream(1100 + seed++));
    if (!rep.pass) pass = false;
    detail << "ou tau=" << tau << (rep.pass ? " ok " : " FAIL ");
  }
  report("AC2 weight moment bound (brownian tight, OU below)", pass, detail.str());
}

// ---- criterion 3: inverse-variation identity --------------------------------

double max_product_gap(const ProblemSpec& spec, const Vec& x0, std::size_t steps,
                       RngStream rng) {
  const auto path = simulate_path(spec, x0, TimeGrid(0.0, spec.T, steps), rng);
  const auto y = simulate_first_variation(spec, path);
  const auto z = simulate_inverse_variation(spec, path);
  double worst = 0.0;
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    worst = std::max(
        worst, (z.matrices[k] * y.matrices[k] - Mat::Identity(spec.d, spec.d)).norm());
  }
  return worst;
}

void criterion_inverse_variation() {
  bool pass = true;
  std::ostringstream detail;

  // Constant-sigma linear presets: the discrete variation and its inverse are
  // both the identity, so the product identity holds at machine precision for
  // every step size.
  ProblemSpec arith = brownian_unit(2);
  arith.coeffs.mu = [](double, const Vec&) { return Vec(Vec::Constant(2, 0.7)); };
  const Problem heat = make_heat(2);
  for (const std::size_t steps : {5u, 50u, 500u}) {
    const double g1 = max_product_gap(heat.spec, query_point(2), steps, make_root_stream(1200));
    const double g2 = max_product_gap(arith, query_point(2), steps, make_root_stream(1201));
    if (g1 > 1e-12 || g2 > 1e-12) pass = false;
    detail << "const-sigma n=" << steps << " gap=" << std::max(g1, g2) << " ";
  }

  // GBM: the product-identity error is O(dt); halving dt halves it (+-30%).
  const Problem gbm = make_gbm_1d();
  const int n_paths = 200;
  double mean_coarse = 0.0, mean_fine = 0.0;
  for (int i = 0; i < n_paths; ++i) {
    mean_coarse += max_product_gap(gbm.spec, Vec::Constant(1, 1.0), 32,
                                   make_root_stream(1210).child(i));
    mean_fine += max_product_gap(gbm.spec, Vec::Constant(1, 1.0), 64,
                                 make_root_stream(1211).child(i));
  }
  mean_coarse /= n_paths;
  mean_fine /= n_paths;
  const double ratio = mean_fine / mean_coarse;
  if (!(ratio >= 0.35 && ratio <= 0.65)) pass = false;
  detail << "gbm halving ratio=" << std::round(ratio * 1000) / 1000;
  report("AC3 inverse-variation identity", pass, detail.str());
}

// ---- criterion 4: Malliavin derivative on GBM -------------------------------

void criterion_malliavin_gbm() {
  const Problem gbm = make_gbm_1d();  // dX = a X dt + b X dW with b = 0.1
  const double b = 0.1;
  const std::size_t n = 200;
  const double dt = 1.0 / static_cast<double>(n);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto path = simulate_path(gbm.spec, Vec::Constant(1, 1.0), TimeGrid(0.0, 1.0, n),
                                    make_root_stream(1300).child(i));
    const auto y = simulate_first_variation(gbm.spec, path);
    const auto z = simulate_inverse_variation(gbm.spec, path);
    for (std::size_t t = 0; t <= n; ++t) {
      for (std::size_t s = t; s <= n; ++s) {
        const double deriv =
            y.matrices[s](0, 0) * z.matrices[t](0, 0) * (b * path.states[t][0]);
        const double target = b * path.states[s][0];
        worst = std::max(worst, std::abs(deriv - target) / std::abs(target));
      }
    }
  }
  const bool pass = worst <= 5.0 * dt;
  std::ostringstream detail;
  detail << "max rel err=" << worst << " allowed=" << 5.0 * dt;
  report("AC4 Malliavin derivative closed form (GBM)", pass, detail.str());
}

// ---- criterion 5: SFPE Picard solves the manufactured problems --------------

void criterion_sfpe_manufactured() {
  bool pass = true;
  std::ostringstream detail;
  for (const int d : {1, 2, 5}) {
    const auto start = std::chrono::steady_clock::now();
    const Problem prob = make_preset("manufactured-d" + std::to_string(d));
    PicardConfig cfg;
    cfg.depth = 4;
    cfg.samples_per_level = {2, 2, 4, 128};
    cfg.grid_steps = 12;
    cfg.budget_paths = 60'000'000;
    const std::vector<std::pair<double, double>> points{
        {0.0, 0.0}, {0.0, 0.5}, {0.1, -0.4}, {0.2, 0.3}, {0.0, 1.0}};
    double worst = 0.0;
    int pi = 0;
    for (const auto& [t, xs] : points) {
      Vec x = query_point(d) * xs * 2.0;
      const ValueGradient vg =
          picard_evaluate(prob.spec, t, x, cfg, make_root_stream(1401 + 10 * d + pi++));
      const Vec truth = prob.analytic->value_gradient(t, x);
      for (int j = 0; j <= d; ++j) {
        const double gap = std::abs(vg.vg[j] - truth[j]);
        const double tol =
            std::max(3.0 * vg.stderr_[j], 0.05 * std::max(std::abs(truth[0]), truth.norm()));
        worst = std::max(worst, gap / tol);
      }
    }
    const double elapsed = seconds_since(start);
    if (worst > 1.0 || elapsed >= 300.0) pass = false;
    detail << "d=" << d << " gap/tol=" << std::round(worst * 100) / 100 << " ("
           << std::round(elapsed) << "s) ";
  }
  report("AC5 SFPE Picard depth 4 (manufactured, d=1,2,5)", pass, detail.str());
}

// ---- criterion 6: one function passes both representations ------------------

void criterion_pde_equivalence() {
  const Problem prob = make_preset("manufactured-d2");
  const PointEvaluator analytic = [&](double t, const Vec& x) {
    return prob.analytic->value_gradient(t, x);
  };
  RngStream probe_rng = make_root_stream(1500).child(0);
  std::vector<StateProbe> probes;
  for (int i = 0; i < 5; ++i) {
    StateProbe p;
    p.s = prob.spec.T * (0.1 + 0.7 * probe_rng.uniform());
    p.x = Vec(2);
    for (int j = 0; j < 2; ++j) p.x[j] = probe_rng.normal();
    probes.push_back(std::move(p));
  }

  FixedPointMc mc;
  mc.n_paths = 40000;
  mc.grid_steps = 64;
  double bias_tol = 0.0;
  for (const auto& p : probes) {
    const Vec cand = analytic(p.s, p.x);
    const double dt = (prob.spec.T - p.s) / static_cast<double>(mc.grid_steps);
    bias_tol = std::max(
        bias_tol, 10.0 * (1.0 + std::abs(prob.spec.f(p.s, p.x, cand[0], cand.tail(2)))) * dt);
  }
  const auto fp =
      fixed_point_residual(prob.spec, analytic, probes, mc, make_root_stream(1501), bias_tol);

  FdSteps fd;
  fd.h_t = 1e-3 * prob.spec.T;
  fd.h_x = 1e-3;
  const auto pde = pde_residual(prob.spec, analytic, probes, fd, 1e-4);

  const bool pass = fp.all_pass() && pde.all_pass();
  std::ostringstream detail;
  double worst_fp = 0.0, worst_pde = 0.0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    worst_fp = std::max(worst_fp, fp.residuals[i]);
    worst_pde = std::max(worst_pde, std::abs(pde.residuals[i]));
  }
  detail << "max fixed-point residual=" << worst_fp << " (tol=" << bias_tol
         << " + 3 stderr), max pde residual=" << worst_pde;
  report("AC6 PDE equivalence of the fixed point", pass, detail.str());
}

// ---- criterion 7: Lyapunov certificates --------------------------------------

void criterion_lyapunov() {
  bool pass = true;
  std::ostringstream detail;
  const LyapunovVq vq(2.0);
  std::vector<Problem> presets;
  presets.push_back(make_heat(2));
  presets.push_back(make_ou_linear(2));
  presets.push_back(make_gbm_1d());
  presets.push_back(make_preset("manufactured-d2"));
  int seed = 0;
  for (const auto& prob : presets) {
    const double rho = prob.spec.growth_c * vq.q() * std::max(vq.q() + 1.0, 3.0) +
                       prob.spec.lipschitz_L * vq.q();
    const auto gen = check_lyapunov_vq(
        prob.spec, vq, rho, make_state_probes(prob.spec, 1000, make_root_stream(1600 + seed)));
    const Vec x0 =
        prob.spec.name == "gbm-1d" ? Vec::Constant(1, 1.0) : query_point(prob.spec.d);
    std::vector<double> horizons;
    for (const double f : {0.25, 0.5, 1.0}) horizons.push_back(prob.spec.T * f);
    const auto certs = moment_certificates(prob.spec, vq, rho, 0.0, x0, horizons, 20000, 100,
                                           make_root_stream(1650 + seed));
    bool cert_ok = true;
    for (const auto& row : certs) cert_ok = cert_ok && row.pass;
    if (!gen.pass || !cert_ok) pass = false;
    detail << prob.spec.name << (gen.pass && cert_ok ? " ok " : " FAIL ");
    ++seed;
  }
  // negative control: rho = 0 must fail on brownian motion
  const Problem heat = make_heat(2);
  const auto control = moment_certificates(heat.spec, vq, 0.0, 0.0, Vec::Zero(2), {1.0}, 20000,
                                           50, make_root_stream(1699));
  if (control[0].pass) pass = false;
  detail << "negative-control " << (control[0].pass ? "FAIL(passed)" : "fails-as-expected");
  report("AC7 Lyapunov certificates", pass, detail.str());
}

// ---- criterion 8: MC hygiene --------------------------------------------------

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void criterion_mc_hygiene(const std::string& cli_path) {
  bool pass = true;
  std::ostringstream detail;

  // stderr slope vs n_paths on log-log in [-0.6, -0.4]
  const Problem heat = make_heat(1);
  ConvergenceStudyConfig cfg;
  cfg.mc.grid_steps = 16;
  const std::vector<std::uint64_t> values{2000, 8000, 32000, 128000};
  const auto rows =
      convergence_study(heat.spec, 0.0, Vec::Constant(1, 0.3), ConvergenceAxis::NPaths, values,
                        cfg, make_root_stream(1700));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& row : rows) {
    const double lx = std::log(row.axis_value);
    const double ly = std::log(row.stderr_[0]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(rows.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (!(slope >= -0.6 && slope <= -0.4)) pass = false;
  detail << "stderr slope=" << std::round(slope * 1000) / 1000 << " ";

  // byte-identical CSV across 1, 4, 8 workers through the CLI
  if (cli_path.empty()) {
    pass = false;
    detail << "(no CLI path given)";
  } else {
    const auto dir = std::filesystem::temp_directory_path() / "kolmo-acceptance";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto config_path = dir / "run.ini";
    {
      std::ofstream cfg_out(config_path);
      cfg_out << "[problem]\npreset = heat\nd = 2\n\n[run]\ncommand = value\nt = 0\n"
              << "x = 0.5 -0.3\nseed = 42\n\n[mc]\nn_paths = 20000\ngrid_steps = 25\n";
    }
    std::vector<std::string> outputs;
    bool ran_ok = true;
    for (const int workers : {1, 4, 8}) {
      const auto out_dir = dir / ("out" + std::to_string(workers));
      const std::string cmd = "\"" + cli_path + "\" --config \"" + config_path.string() +
                              "\" --output \"" + out_dir.string() + "\" --threads " +
                              std::to_string(workers) + " > /dev/null";
      if (std::system(cmd.c_str()) != 0) ran_ok = false;
      outputs.push_back(read_file(out_dir / "results.csv"));
    }
    const bool identical =
        ran_ok && !outputs[0].empty() && outputs[0] == outputs[1] && outputs[1] == outputs[2];
    if (!identical) pass = false;
    detail << "worker bytes " << (identical ? "identical" : "DIFFER");
  }
  report("AC8 MC hygiene (rate + determinism)", pass, detail.str());
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli_path = argc > 1 ? argv[1] : "";
  criterion_bel_identity();
  criterion_weight_moment_bound();
  criterion_inverse_variation();
  criterion_malliavin_gbm();
  criterion_sfpe_manufactured();
  criterion_pde_equivalence();
  criterion_lyapunov();
  criterion_mc_hygiene(cli_path);
  if (g_failures > 0) {
    std::cout << g_failures << " acceptance criterion(s) failed\n";
    return 1;
  }
  std::cout << "all acceptance criteria passed\n";
  return 0;
}
