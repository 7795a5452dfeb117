#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rieszlab/common.hpp"

namespace rieszlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Experiment plan: flat key/value config file (`key = value`, `#` comments,
/// comma-separated lists, `a..b` integer ranges) plus command-line overrides.
/// Precedence: CLI > file > defaults.
struct ExperimentConfig {
  std::vector<std::string> experiments;  // dimscan | factor-check | contraction |
                                         // sector-sup | hermite-check | eps-limit |
                                         // square-function | ddstar-check
  std::string setting = "cyclic";        // cyclic | hermite
  int K = 4;
  std::vector<int> d_values = {1, 2, 3};
  int N = 8;
  std::vector<double> p_values = {2.0};
  std::vector<int> r_values;  // empty: all axes
  double sigma = 0.5;
  int g0 = 1;
  std::string mu = "nearest";  // nearest | lazy
  std::vector<double> epsilons = {1.0, 0.1, 0.01, 0.001};
  std::vector<double> t_values = {0.1, 1.0, 10.0};
  int trials = 100;
  int restarts = 16;
  std::uint64_t seed = kDefaultSeed;
  double phi1 = 0.7853981633974483;
  double phi2 = 0.7853981633974483;
  int angular = 64;
  int radial = 32;
  int quad_factor = 4;  // quadrature rule size = quad_factor * N
  double boyd_tol = 1e-9;
  int boyd_maxiter = 2000;
  double power_tol = 1e-10;
  double identity_tol = 1e-12;
  std::string out = "results.csv";
  std::size_t mem_cap = std::size_t{1} << 24;
  int jobs = 1;
  std::string witness_dir;  // empty: witnesses not written

  static ExperimentConfig from_file(const std::string& path);

  /// Applies one `key=value` override; throws ConfigError on unknown keys.
  void apply_override(const std::string& key, const std::string& value);

  /// Full validation, including the memory-cap checks, before any allocation.
  void validate() const;
};

std::vector<std::string> split_list(const std::string& value);
std::vector<int> parse_int_list(const std::string& value);     // supports a..b
std::vector<double> parse_double_list(const std::string& value);  // supports inf
double parse_p(const std::string& token);

}  // namespace rieszlab
