#include "rieszlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace rieszlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& s) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("not an integer: '" + s + "'");
  }
}

double to_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
}

const std::set<std::string> kExperiments = {
    "dimscan",   "factor-check",    "contraction",     "sector-sup",
    "hermite-check", "eps-limit",   "square-function", "ddstar-check"};

}  // namespace

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& value) {
  std::vector<int> out;
  for (const auto& tok : split_list(value)) {
    const auto dots = tok.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_int(tok));
    } else {
      const int lo = to_int(trim(tok.substr(0, dots)));
      const int hi = to_int(trim(tok.substr(dots + 2)));
      if (hi < lo) throw ConfigError("empty range: '" + tok + "'");
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    }
  }
  return out;
}

double parse_p(const std::string& token) {
  if (token == "inf" || token == "Inf" || token == "INF") return kInf;
  return to_double(token);
}

std::vector<double> parse_double_list(const std::string& value) {
  std::vector<double> out;
  for (const auto& tok : split_list(value)) out.push_back(parse_p(tok));
  return out;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    cfg.apply_override(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void ExperimentConfig::apply_override(const std::string& key, const std::string& value) {
  if (key == "experiment") {
    experiments = split_list(value);
  } else if (key == "setting") {
    setting = value;
  } else if (key == "K") {
    K = to_int(value);
  } else if (key == "d") {
    d_values = parse_int_list(value);
  } else if (key == "N") {
    N = to_int(value);
  } else if (key == "p") {
    p_values = parse_double_list(value);
  } else if (key == "r") {
    r_values = (value == "all") ? std::vector<int>{} : parse_int_list(value);
  } else if (key == "sigma") {
    sigma = to_double(value);
  } else if (key == "g0") {
    g0 = to_int(value);
  } else if (key == "mu") {
    mu = value;
  } else if (key == "epsilon") {
    epsilons = parse_double_list(value);
  } else if (key == "t") {
    t_values = parse_double_list(value);
  } else if (key == "trials") {
    trials = to_int(value);
  } else if (key == "restarts") {
    restarts = to_int(value);
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(std::stoull(value));
  } else if (key == "phi1") {
    phi1 = to_double(value);
  } else if (key == "phi2") {
    phi2 = to_double(value);
  } else if (key == "angular") {
    angular = to_int(value);
  } else if (key == "radial") {
    radial = to_int(value);
  } else if (key == "quad_factor") {
    quad_factor = to_int(value);
  } else if (key == "boyd_tol") {
    boyd_tol = to_double(value);
  } else if (key == "boyd_maxiter") {
    boyd_maxiter = to_int(value);
  } else if (key == "power_tol") {
    power_tol = to_double(value);
  } else if (key == "identity_tol") {
    identity_tol = to_double(value);
  } else if (key == "out") {
    out = value;
  } else if (key == "mem_cap") {
    const long long cap = std::stoll(value);
    if (cap <= 0) throw ConfigError("mem_cap must be positive");
    mem_cap = static_cast<std::size_t>(cap);
  } else if (key == "jobs") {
    jobs = to_int(value);
  } else if (key == "witness_dir") {
    witness_dir = value;
  } else {
    throw ConfigError("unknown config key: '" + key + "'");
  }
}

void ExperimentConfig::validate() const {
  if (experiments.empty()) throw ConfigError("no experiment selected");
  for (const auto& e : experiments) {
    if (!kExperiments.count(e)) throw ConfigError("unknown experiment: '" + e + "'");
  }
  if (setting != "cyclic" && setting != "hermite")
    throw ConfigError("setting must be cyclic or hermite");
  if (K < 2) throw ConfigError("K must be >= 2");
  if (N < 1) throw ConfigError("N must be >= 1");
  if (d_values.empty()) throw ConfigError("d-range is empty");
  for (int d : d_values)
    if (d < 1) throw ConfigError("d must be >= 1");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
  for (double e : epsilons)
    if (e < 0.0) throw ConfigError("epsilon must be >= 0");
  for (double t : t_values)
    if (t < 0.0) throw ConfigError("t must be >= 0");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (quad_factor < 1) throw ConfigError("quad_factor must be >= 1");
  if (angular < 2 || radial < 2) throw ConfigError("grid counts must be >= 2");
  constexpr double half_pi = 1.5707963267948966;
  if (!(phi1 > 0.0 && phi1 <= half_pi) || !(phi2 > 0.0 && phi2 <= half_pi))
    throw ConfigError("phi angles must lie in (0, pi/2]");
  if (mu != "nearest" && mu != "lazy") throw ConfigError("mu must be nearest or lazy");

  for (double p : p_values) {
    if (!(p >= 1.0)) throw ConfigError("p must be >= 1");
    const bool endpoint = (p == 1.0) || (p == kInf);
    if (endpoint) {
      for (const auto& e : experiments) {
        if (e == "dimscan" && setting == "hermite")
          throw ConfigError("hermite dimscan requires 1 < p < inf or p = 2");
        if (e == "eps-limit") continue;  // p unused
        if (e != "dimscan" && e != "contraction" && e != "square-function" &&
            e != "sector-sup" && e != "hermite-check" && e != "ddstar-check" &&
            e != "factor-check" && e != "eps-limit")
          throw ConfigError("p = 1 or inf is not supported by " + e);
      }
    }
  }

  // memory-cap checks before any allocation; experiments that exist in only
  // one setting force it regardless of the configured default
  bool needs_cyclic = false, needs_hermite = false, needs_quadrature = false;
  for (const auto& e : experiments) {
    if (e == "contraction" || e == "square-function" || e == "ddstar-check") {
      needs_cyclic = true;
    } else if (e == "hermite-check") {
      needs_hermite = true;
      needs_quadrature = true;
    } else if (e == "dimscan" || e == "factor-check" || e == "eps-limit") {
      if (setting == "cyclic") {
        needs_cyclic = true;
      } else {
        needs_hermite = true;
        if (e == "dimscan") needs_quadrature = true;
      }
    }
  }
  const int dmax = *std::max_element(d_values.begin(), d_values.end());
  if (needs_cyclic) {
    std::size_t n = 1;
    for (int a = 0; a < dmax; ++a) {
      if (n > mem_cap / static_cast<std::size_t>(K))
        throw ConfigError("K^d exceeds mem_cap");
      n *= static_cast<std::size_t>(K);
    }
  }
  if (needs_hermite) {
    std::size_t n = 1;
    const auto base = static_cast<std::size_t>(N) + 1;
    for (int a = 0; a < dmax; ++a) {
      if (n > mem_cap / base) throw ConfigError("(N+1)^d exceeds mem_cap");
      n *= base;
    }
  }
  if (needs_quadrature) {
    const auto nodes =
        std::max(static_cast<std::size_t>(quad_factor) * static_cast<std::size_t>(N),
                 static_cast<std::size_t>(N) + 1);
    std::size_t q = 1;
    for (int a = 0; a < dmax; ++a) {
      if (q > mem_cap / nodes)
        throw ConfigError("quadrature node tensor exceeds mem_cap");
      q *= nodes;
    }
  }
  for (int r : r_values) {
    if (r < 0 || r >= dmax)
      throw ConfigError("axis r out of range for the requested d values");
  }
}

}  // namespace rieszlab
