#include "kolmo/config.hpp"

#include <cmath>
#include <sstream>

namespace kolmo {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

struct KeyValue {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

[[noreturn]] void fail(const KeyValue& kv, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(kv.line) + ": key '" + kv.key + "': " + msg);
}

double parse_real(const KeyValue& kv) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(kv.value, &pos);
  } catch (...) {
    fail(kv, "expected a real number, got '" + kv.value + "'");
  }
  if (pos != kv.value.size()) fail(kv, "trailing characters in '" + kv.value + "'");
  return v;
}

std::uint64_t parse_uint(const KeyValue& kv) {
  if (!kv.value.empty() && kv.value[0] == '-') fail(kv, "must be nonnegative");
  std::size_t pos = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(kv.value, &pos);
  } catch (...) {
    fail(kv, "expected an integer, got '" + kv.value + "'");
  }
  if (pos != kv.value.size()) fail(kv, "trailing characters in '" + kv.value + "'");
  return v;
}

bool parse_bool(const KeyValue& kv) {
  if (kv.value == "true" || kv.value == "1") return true;
  if (kv.value == "false" || kv.value == "0") return false;
  fail(kv, "expected true/false");
}

std::vector<double> parse_real_list(const KeyValue& kv) {
  std::istringstream in(kv.value);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    KeyValue item = kv;
    item.value = tok;
    out.push_back(parse_real(item));
  }
  if (out.empty()) fail(kv, "expected at least one number");
  return out;
}

std::vector<std::uint64_t> parse_uint_list(const KeyValue& kv) {
  std::istringstream in(kv.value);
  std::vector<std::uint64_t> out;
  std::string tok;
  while (in >> tok) {
    KeyValue item = kv;
    item.value = tok;
    out.push_back(parse_uint(item));
  }
  if (out.empty()) fail(kv, "expected at least one integer");
  return out;
}

Command parse_command(const KeyValue& kv) {
  if (kv.value == "value") return Command::Value;
  if (kv.value == "gradient") return Command::Gradient;
  if (kv.value == "solve") return Command::Solve;
  if (kv.value == "verify") return Command::Verify;
  if (kv.value == "converge") return Command::Converge;
  if (kv.value == "moments") return Command::Moments;
  fail(kv, "unknown command '" + kv.value + "'");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  cfg.raw_text = text;
  cfg.picard.samples_per_level.clear();

  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  bool have_command = false, have_t = false, have_x = false, have_problem = false;

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "problem" && section != "run" && section != "mc" && section != "picard") {
        throw ConfigError("config line " + std::to_string(line_no) + ": unknown section [" +
                          section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    KeyValue kv{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
    if (kv.key.empty()) fail(kv, "empty key");

    if (kv.section == "problem") {
      if (kv.key == "preset") {
        cfg.preset = kv.value;
        have_problem = true;
      } else if (kv.key == "d") {
        cfg.d = static_cast<int>(parse_uint(kv));
        if (cfg.d <= 0) fail(kv, "dimension must be positive");
      } else if (kv.key == "T") {
        cfg.T = parse_real(kv);
        if (!(cfg.T > 0.0)) fail(kv, "horizon must be positive");
      } else if (kv.key == "drift") {
        if (kv.value != "zero" && kv.value != "ou" && kv.value != "linear" && kv.value != "sine") {
          fail(kv, "drift must be zero|ou|linear|sine");
        }
        cfg.drift = kv.value;
      } else if (kv.key == "drift_param") {
        cfg.drift_param = parse_real(kv);
      } else if (kv.key == "diffusion") {
        if (kv.value != "const" && kv.value != "gbm") fail(kv, "diffusion must be const|gbm");
        cfg.diffusion = kv.value;
      } else if (kv.key == "diffusion_param") {
        cfg.diffusion_param = parse_real(kv);
        if (!(cfg.diffusion_param > 0.0)) fail(kv, "diffusion scale must be positive");
      } else {
        fail(kv, "unknown key in [problem]");
      }
    } else if (kv.section == "run") {
      if (kv.key == "command") {
        cfg.command = parse_command(kv);
        have_command = true;
      } else if (kv.key == "t") {
        cfg.t = parse_real(kv);
        have_t = true;
      } else if (kv.key == "x") {
        const auto xs = parse_real_list(kv);
        cfg.x = Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
        have_x = true;
      } else if (kv.key == "seed") {
        cfg.seed = parse_uint(kv);
        cfg.seed_set = true;
      } else if (kv.key == "output") {
        cfg.output = kv.value;
      } else if (kv.key == "threads") {
        cfg.threads = static_cast<unsigned>(parse_uint(kv));
      } else if (kv.key == "axis") {
        if (kv.value != "n_paths" && kv.value != "grid_steps" && kv.value != "depth") {
          fail(kv, "axis must be n_paths|grid_steps|depth");
        }
        cfg.axis = kv.value;
      } else if (kv.key == "axis_values") {
        cfg.axis_values = parse_uint_list(kv);
      } else {
        fail(kv, "unknown key in [run]");
      }
    } else if (kv.section == "mc") {
      if (kv.key == "n_paths") {
        cfg.mc.n_paths = parse_uint(kv);
        if (cfg.mc.n_paths == 0) fail(kv, "n_paths must be positive");
      } else if (kv.key == "grid_steps") {
        cfg.mc.grid_steps = static_cast<std::size_t>(parse_uint(kv));
        if (cfg.mc.grid_steps == 0) fail(kv, "grid_steps must be positive");
      } else if (kv.key == "antithetic") {
        cfg.mc.antithetic = parse_bool(kv);
      } else {
        fail(kv, "unknown key in [mc]");
      }
    } else if (kv.section == "picard") {
      if (kv.key == "depth") {
        cfg.picard.depth = static_cast<int>(parse_uint(kv));
        if (cfg.picard.depth < 1) fail(kv, "depth must be >= 1");
      } else if (kv.key == "samples_per_level") {
        cfg.picard.samples_per_level = parse_uint_list(kv);
      } else if (kv.key == "scheme") {
        if (kv.value == "plain") {
          cfg.picard.scheme = PicardScheme::Plain;
        } else if (kv.value == "multilevel") {
          cfg.picard.scheme = PicardScheme::Multilevel;
        } else {
          fail(kv, "scheme must be plain|multilevel");
        }
      } else if (kv.key == "quadrature") {
        if (kv.value == "left") {
          cfg.picard.quadrature = Quadrature::LeftPoint;
        } else if (kv.value == "randomized") {
          cfg.picard.quadrature = Quadrature::RandomizedUniform;
        } else {
          fail(kv, "quadrature must be left|randomized");
        }
      } else if (kv.key == "grid_steps") {
        cfg.picard.grid_steps = static_cast<std::size_t>(parse_uint(kv));
        if (cfg.picard.grid_steps == 0) fail(kv, "grid_steps must be positive");
      } else if (kv.key == "budget") {
        cfg.picard.budget_paths = parse_uint(kv);
      } else {
        fail(kv, "unknown key in [picard]");
      }
    } else {
      fail(kv, "key outside any section");
    }
  }

  if (!have_problem) throw ConfigError("config: missing required key 'preset' in [problem]");
  if (!have_command) throw ConfigError("config: missing required key 'command' in [run]");
  if (!have_t) throw ConfigError("config: missing required key 't' in [run]");
  if (!have_x) throw ConfigError("config: missing required key 'x' in [run]");
  return cfg;
}

Problem build_problem(const RunConfig& config) {
  Problem problem;
  if (config.preset == "custom") {
    const int d = config.d;
    const double s = config.diffusion_param;
    CoefficientField field;
    double drift_growth = 0.0;
    double drift_mono = 0.0;
    if (config.drift == "zero") {
      field.mu = [d](double, const Vec&) { return Vec(Vec::Zero(d)); };
      field.jac_mu = [d](double, const Vec&) { return Mat(Mat::Zero(d, d)); };
    } else if (config.drift == "ou") {
      const double theta = config.drift_param;
      if (!(theta > 0.0)) throw ConfigError("custom problem: ou drift needs drift_param > 0");
      field.mu = [theta](double, const Vec& x) { return Vec(-theta * x); };
      field.jac_mu = [theta, d](double, const Vec&) {
        return Mat(-theta * Mat::Identity(d, d));
      };
    } else if (config.drift == "linear") {
      const double a = config.drift_param;
      field.mu = [a](double, const Vec& x) { return Vec(a * x); };
      field.jac_mu = [a, d](double, const Vec&) { return Mat(a * Mat::Identity(d, d)); };
      drift_mono = std::max(a, 0.0) * 2.0;
      drift_growth = std::max(a, 0.0);
    } else {  // sine: bounded trigonometric drift, Lipschitz constant |amp|
      const double amp = config.drift_param;
      field.mu = [amp](double, const Vec& x) { return Vec(amp * x.array().sin()); };
      field.jac_mu = [amp, d](double, const Vec& x) {
        return Mat(amp * x.array().cos().matrix().asDiagonal().toDenseMatrix());
      };
      drift_mono = 2.0 * std::abs(amp);
      drift_growth = 0.5 * std::abs(amp) * std::sqrt(static_cast<double>(d));
    }
    if (config.diffusion == "gbm") {
      if (d != 1) throw ConfigError("custom problem: gbm diffusion requires d = 1");
      problem = make_gbm_1d(config.drift == "linear" ? config.drift_param : 0.0, s, config.T);
      return problem;
    }
    field.sigma = [s, d](double, const Vec&) { return Mat(s * Mat::Identity(d, d)); };
    field.jac_sigma_col = [d](double, const Vec&, int) { return Mat(Mat::Zero(d, d)); };
    problem.spec.d = d;
    problem.spec.T = config.T;
    problem.spec.coeffs = std::move(field);
    problem.spec.f = [](double, const Vec&, double, const Vec&) { return 0.0; };
    problem.spec.g = [](const Vec& x) { return std::exp(-0.5 * x.squaredNorm()); };
    problem.spec.c = drift_mono;
    problem.spec.growth_c = std::max(s * s * d, drift_growth);
    problem.spec.alpha = s * s;
    problem.spec.lipschitz_L = 1e-9;
    problem.spec.growth_p = 1.0;
    problem.spec.probe_box = ProbeBox{Vec::Constant(d, -2.0), Vec::Constant(d, 2.0)};
    problem.spec.name = "custom";
  } else {
    problem = make_preset(config.preset, config.d);
  }

  if (config.x.size() != problem.spec.d) {
    throw ConfigError("config: key 'x': expected " + std::to_string(problem.spec.d) +
                      " coordinates, got " + std::to_string(config.x.size()));
  }
  if (config.t < 0.0 || config.t > problem.spec.T) {
    throw ConfigError("config: key 't': out of range [0, T]");
  }
  return problem;
}

}  // namespace kolmo
