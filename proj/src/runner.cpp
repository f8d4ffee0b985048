#include "kolmo/runner.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>

#include "kolmo/csv.hpp"
#include "kolmo/verification.hpp"

namespace kolmo {

namespace {

std::string command_name(Command c) {
  switch (c) {
    case Command::Value: return "value";
    case Command::Gradient: return "gradient";
    case Command::Solve: return "solve";
    case Command::Verify: return "verify";
    case Command::Converge: return "converge";
    case Command::Moments: return "moments";
  }
  return "?";
}

std::string hash_hex(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

csv::Writer open_csv(const RunConfig& cfg, const std::string& problem_name,
                     const std::string& file) {
  std::filesystem::create_directories(cfg.output);
  csv::Writer w((std::filesystem::path(cfg.output) / file).string());
  w.comment(std::string("kolmo ") + kVersion + " problem=" + problem_name +
            " command=" + command_name(cfg.command) + " seed=" + std::to_string(cfg.seed) +
            " config=" + hash_hex(csv::hash_text(cfg.raw_text)));
  std::string point = "point t=" + csv::fmt(cfg.t) + " x=";
  for (Eigen::Index i = 0; i < cfg.x.size(); ++i) {
    if (i > 0) point += " ";
    point += csv::fmt(cfg.x[i]);
  }
  w.comment(point);
  return w;
}

void write_estimate_rows(csv::Writer& w, const Estimate& est) {
  w.row({"quantity", "component", "value", "stderr", "n_samples"});
  for (Eigen::Index i = 0; i < est.mean.size(); ++i) {
    const bool is_value = est.mean.size() == 1 || i == 0;
    const std::string quantity =
        est.mean.size() == 1 ? "value" : (is_value ? "value" : "grad");
    const std::string component =
        est.mean.size() == 1 ? "0" : std::to_string(is_value ? 0 : static_cast<int>(i - 1));
    w.row({quantity, component, csv::fmt(est.mean[i]), csv::fmt(est.stderr_[i]),
           csv::fmt(est.n_samples)});
  }
}

PicardConfig effective_picard(const RunConfig& cfg) {
  PicardConfig pc = cfg.picard;
  pc.threads = cfg.threads;
  if (pc.samples_per_level.empty()) {
    pc.samples_per_level.resize(pc.depth);
    std::uint64_t m = 4;
    for (int j = 0; j < pc.depth; ++j, m *= 4) pc.samples_per_level[j] = m;
  }
  return pc;
}

struct CheckTable {
  csv::Writer writer;
  int passed = 0;
  int total = 0;

  void add(const std::string& check, const std::string& context, double observed, double bound,
           bool pass) {
    writer.row({check, context, csv::fmt(observed), csv::fmt(bound), csv::fmt(pass)});
    ++total;
    if (pass) ++passed;
  }
};

int run_verify(const RunConfig& cfg, const Problem& problem) {
  const ProblemSpec& spec = problem.spec;
  const RngStream root = make_root_stream(cfg.seed);
  McConfig mc = cfg.mc;
  mc.threads = cfg.threads;

  CheckTable table{open_csv(cfg, spec.name, "checks.csv")};
  table.writer.row({"check", "context", "observed", "bound", "pass"});

  spec.validate(root.child(900));

  const std::size_t n_probes = 1000;
  const auto mono = check_monotonicity(spec.coeffs, spec.c,
                                       make_monotonicity_probes(spec, n_probes, root.child(901)));
  table.add(mono.condition, "c/2", mono.observed, mono.bound, mono.pass);
  const auto ellip = check_ellipticity(spec.coeffs, spec.alpha,
                                       make_ellipticity_probes(spec, n_probes, root.child(902)));
  table.add(ellip.condition, "alpha", ellip.observed, ellip.bound, ellip.pass);
  const auto lip =
      check_lipschitz_f(spec, make_lipschitz_probes(spec, n_probes, root.child(903)));
  table.add(lip.condition, "L", lip.observed, lip.bound, lip.pass);
  const auto growth = check_growth(spec, make_state_probes(spec, n_probes, root.child(904)));
  table.add(growth.condition, "growth_c", growth.observed, growth.bound, growth.pass);

  const LyapunovVq vq(2.0);
  const double rho = spec.growth_c * vq.q() * std::max(vq.q() + 1.0, 3.0) +
                     spec.lipschitz_L * vq.q();
  const auto lyap =
      check_lyapunov_vq(spec, vq, rho, make_state_probes(spec, n_probes, root.child(905)));
  table.add(lyap.condition, "rho", lyap.observed, lyap.bound, lyap.pass);

  std::vector<double> horizons;
  for (const double fraction : {0.25, 0.5, 1.0}) {
    horizons.push_back((spec.T - cfg.t) * fraction);
  }
  const auto certs = moment_certificates(spec, vq, rho, cfg.t, cfg.x, horizons, mc.n_paths,
                                         mc.grid_steps, root.child(906), cfg.threads);
  for (const auto& row : certs) {
    table.add("moment_certificate", "tau=" + csv::fmt(row.horizon), row.mean,
              row.bound * (1.0 + 3.0 * row.rel_se), row.pass);
  }

  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const auto report = weight_moment_report(spec, cfg.x, cfg.t, cfg.t + horizons[i], mc.n_paths,
                                             mc.grid_steps, root.child(907 + i), cfg.threads);
    table.add("weight_moment", "tau=" + csv::fmt(report.s - report.t), report.second_moment,
              report.paper_bound + 3.0 * report.second_moment_se, report.pass);
  }

  const auto cross = gradient_crosscheck(spec, cfg.t, cfg.x, spec.g, mc, root.child(910));
  table.add("gradient_crosscheck", "gap", (cross.bel - cross.fd).norm(),
            std::max(3.0 * std::sqrt(cross.bel_se.squaredNorm() + cross.fd_se.squaredNorm()),
                     2e-2 * cross.scale),
            cross.pass);

  if (problem.analytic) {
    const PointEvaluator analytic_eval = [&](double t, const Vec& x) {
      return problem.analytic->value_gradient(t, x);
    };
    RngStream probe_rng = root.child(911);
    std::vector<StateProbe> pde_probes;
    for (int i = 0; i < 5; ++i) {
      StateProbe p;
      p.s = spec.T * (0.1 + 0.8 * probe_rng.uniform());
      p.x = cfg.x.size() == spec.d ? cfg.x : Vec::Zero(spec.d);
      for (int j = 0; j < spec.d; ++j) p.x[j] += 0.3 * probe_rng.normal();
      pde_probes.push_back(std::move(p));
    }
    FdSteps fd;
    fd.h_t = 1e-3 * spec.T;
    const auto pde = pde_residual(spec, analytic_eval, pde_probes, fd);
    for (std::size_t i = 0; i < pde.residuals.size(); ++i) {
      table.add("pde_residual", "probe" + std::to_string(i), std::abs(pde.residuals[i]),
                pde.tolerance, pde.pass[i]);
    }

    std::vector<StateProbe> fp_probes(pde_probes.begin(), pde_probes.begin() + 3);
    FixedPointMc fp;
    fp.n_paths = mc.n_paths;
    fp.grid_steps = mc.grid_steps;
    fp.threads = cfg.threads;
    double bias_tol = 0.0;
    for (const auto& p : fp_probes) {
      const Vec cand = analytic_eval(p.s, p.x);
      const double dt = (spec.T - p.s) / static_cast<double>(fp.grid_steps);
      bias_tol = std::max(
          bias_tol, 10.0 * (1.0 + std::abs(spec.f(p.s, p.x, cand[0], cand.tail(spec.d)))) * dt);
    }
    const auto fp_report =
        fixed_point_residual(spec, analytic_eval, fp_probes, fp, root.child(912), bias_tol);
    for (std::size_t i = 0; i < fp_report.residuals.size(); ++i) {
      table.add("fixed_point_residual", "probe" + std::to_string(i), fp_report.residuals[i],
                fp_report.tolerance + 3.0 * fp_report.stderrs[i], fp_report.pass[i]);
    }
  }

  std::cout << "verify: " << table.passed << "/" << table.total << " checks passed\n";
  return table.total - table.passed;
}

}  // namespace

int run(const RunConfig& cfg) {
  if (!cfg.seed_set) {
    throw ConfigError("config: key 'seed': required (no wall-clock default)");
  }
  const Problem problem = build_problem(cfg);
  const ProblemSpec& spec = problem.spec;
  const RngStream root = make_root_stream(cfg.seed);
  McConfig mc = cfg.mc;
  mc.threads = cfg.threads;

  switch (cfg.command) {
    case Command::Value: {
      const Estimate est = estimate_value(spec, cfg.t, cfg.x, spec.g, nullptr, mc, root);
      csv::Writer w = open_csv(cfg, spec.name, "results.csv");
      write_estimate_rows(w, est);
      std::cout << "value: mean=" << est.mean[0] << " stderr=" << est.stderr_[0]
                << " n=" << est.n_samples << "\n";
      return 0;
    }
    case Command::Gradient: {
      const Estimate est = estimate_gradient_bel(spec, cfg.t, cfg.x, spec.g, mc, root);
      Estimate full;
      full.mean = Vec(spec.d + 1);
      full.stderr_ = Vec(spec.d + 1);
      full.mean[0] = std::numeric_limits<double>::quiet_NaN();
      full.stderr_[0] = 0.0;
      full.mean.tail(spec.d) = est.mean;
      full.stderr_.tail(spec.d) = est.stderr_;
      full.n_samples = est.n_samples;
      csv::Writer w = open_csv(cfg, spec.name, "results.csv");
      write_estimate_rows(w, full);
      std::cout << "gradient: |mean|=" << est.mean.norm() << " n=" << est.n_samples << "\n";
      return 0;
    }
    case Command::Solve: {
      const PicardConfig pc = effective_picard(cfg);
      const ValueGradient vg = picard_evaluate(spec, cfg.t, cfg.x, pc, root);
      csv::Writer w = open_csv(cfg, spec.name, "results.csv");
      w.row({"quantity", "component", "value", "stderr", "n_samples"});
      w.row({"value", "0", csv::fmt(vg.vg[0]), csv::fmt(vg.stderr_[0]), csv::fmt(vg.n_samples)});
      for (int j = 0; j < spec.d; ++j) {
        w.row({"grad", std::to_string(j), csv::fmt(vg.vg[j + 1]), csv::fmt(vg.stderr_[j + 1]),
               csv::fmt(vg.n_samples)});
      }
      w.row({"paths_used", "0", csv::fmt(vg.paths_used), "0", csv::fmt(vg.n_samples)});
      std::cout << "solve: value=" << vg.vg[0] << " stderr=" << vg.stderr_[0]
                << " paths=" << vg.paths_used << "\n";
      return 0;
    }
    case Command::Verify:
      return run_verify(cfg, problem);
    case Command::Converge: {
      if (cfg.axis_values.empty()) {
        throw ConfigError("config: key 'axis_values': required for the converge command");
      }
      ConvergenceStudyConfig study;
      study.mc = mc;
      study.picard = effective_picard(cfg);
      study.oracle = problem.analytic;
      const ConvergenceAxis axis = cfg.axis == "n_paths"
                                       ? ConvergenceAxis::NPaths
                                       : (cfg.axis == "grid_steps" ? ConvergenceAxis::GridSteps
                                                                   : ConvergenceAxis::Depth);
      const auto rows = convergence_study(spec, cfg.t, cfg.x, axis, cfg.axis_values, study, root);
      csv::Writer w = open_csv(cfg, spec.name, "convergence.csv");
      w.row({"axis", "axis_value", "value", "value_stderr", "grad_norm", "grad_stderr_norm",
             "error_vs_oracle", "seconds"});
      for (const auto& row : rows) {
        w.row({cfg.axis, csv::fmt(row.axis_value), csv::fmt(row.estimate[0]),
               csv::fmt(row.stderr_[0]), csv::fmt(row.estimate.tail(spec.d).norm()),
               csv::fmt(row.stderr_.tail(spec.d).norm()), csv::fmt(row.error),
               csv::fmt(row.seconds)});
      }
      std::cout << "converge: " << rows.size() << " rows (" << cfg.axis << ")\n";
      return 0;
    }
    case Command::Moments: {
      std::vector<double> horizons;
      for (const double fraction : {0.25, 0.5, 1.0}) {
        horizons.push_back((spec.T - cfg.t) * fraction);
      }
      csv::Writer w = open_csv(cfg, spec.name, "moments.csv");
      w.row({"t", "s", "n_paths", "mean_norm", "second_moment", "paper_bound", "pass"});
      for (std::size_t i = 0; i < horizons.size(); ++i) {
        const auto report = weight_moment_report(spec, cfg.x, cfg.t, cfg.t + horizons[i],
                                                 mc.n_paths, mc.grid_steps, root.child(10 + i),
                                                 cfg.threads);
        w.row({csv::fmt(report.t), csv::fmt(report.s), csv::fmt(report.n_paths),
               csv::fmt(report.mean_norm), csv::fmt(report.second_moment),
               csv::fmt(report.paper_bound), csv::fmt(report.pass)});
      }
      const LyapunovVq vq(2.0);
      const double rho = spec.growth_c * vq.q() * std::max(vq.q() + 1.0, 3.0) +
                         spec.lipschitz_L * vq.q();
      const auto certs = moment_certificates(spec, vq, rho, cfg.t, cfg.x, horizons, mc.n_paths,
                                             mc.grid_steps, root.child(20), cfg.threads);
      csv::Writer cw = open_csv(cfg, spec.name, "certificates.csv");
      cw.row({"horizon", "mean", "rel_stderr", "bound", "rho", "pass"});
      for (const auto& row : certs) {
        cw.row({csv::fmt(row.horizon), csv::fmt(row.mean), csv::fmt(row.rel_se),
                csv::fmt(row.bound), csv::fmt(rho), csv::fmt(row.pass)});
      }
      std::cout << "moments: " << horizons.size() << " horizons\n";
      return 0;
    }
  }
  throw Error("unreachable command");
}

}  // namespace kolmo
