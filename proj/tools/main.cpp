#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "rieszlab/config.hpp"
#include "rieszlab/experiments.hpp"
#include "rieszlab/spectral.hpp"

namespace {

int run_command(const std::string& config_path,
                const std::vector<std::string>& overrides) {
  rieszlab::ExperimentConfig cfg;
  try {
    cfg = rieszlab::ExperimentConfig::from_file(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw rieszlab::ConfigError("override must be key=value: '" + kv + "'");
      cfg.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
  } catch (const rieszlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  const rieszlab::RunResult result = rieszlab::run_experiments(cfg);
  std::cout << "wrote " << result.rows.size() << " rows to " << cfg.out << "\n";

  bool has_sector = false;
  for (const auto& e : cfg.experiments) has_sector |= (e == "sector-sup");
  if (has_sector) {
    for (double p : cfg.p_values) {
      if (p > 1.0 && std::isfinite(p)) {
        std::printf("p = %g requires sector angles > p* = %.12g rad\n", p,
                    rieszlab::p_star(p));
      }
    }
  }
  for (const auto& row : result.rows) {
    if (!row.converged || row.status.rfind("error:", 0) == 0)
      std::cerr << "row " << row.experiment << " d=" << row.d
                << " status=" << row.status << " converged=" << row.converged
                << "\n";
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dimension-free Riesz transform experiments on cyclic groups "
               "and Hermite expansions"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment scan from a config file");
  std::string config_path;
  std::vector<std::string> overrides;
  run->add_option("config", config_path, "config file (key = value lines)")
      ->required();
  run->add_option("--set", overrides, "override a config key (key=value)");
  std::string seed_str, jobs_str, out_str, cap_str;
  run->add_option("--seed", seed_str, "override the seed");
  run->add_option("--jobs", jobs_str, "worker threads for scan rows");
  run->add_option("--out", out_str, "output CSV path");
  run->add_option("--mem-cap", cap_str, "grid point budget");

  auto* plot = app.add_subcommand("plot", "emit a plot script for a dimscan CSV");
  std::string csv_path, script_path;
  plot->add_option("csv", csv_path, "CSV produced by `run`")->required();
  plot->add_option("--out", script_path, "script path (default <csv>.plot.py)");

  auto* self = app.add_subcommand("selftest", "run the invariant battery");

  auto* verify = app.add_subcommand("verify", "re-derive CSV rows from witnesses");
  std::string vcsv, vdir, vmu = "nearest";
  int vg0 = 1;
  verify->add_option("csv", vcsv, "CSV produced by `run`")->required();
  verify->add_option("--witness-dir", vdir, "directory written via witness_dir")
      ->required();
  verify->add_option("--g0", vg0, "group element used by the run (default 1)");
  verify->add_option("--mu", vmu, "measure used by the run (nearest|lazy)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (!seed_str.empty()) overrides.push_back("seed=" + seed_str);
      if (!jobs_str.empty()) overrides.push_back("jobs=" + jobs_str);
      if (!out_str.empty()) overrides.push_back("out=" + out_str);
      if (!cap_str.empty()) overrides.push_back("mem_cap=" + cap_str);
      return run_command(config_path, overrides);
    }
    if (plot->parsed()) {
      if (script_path.empty()) script_path = csv_path + ".plot.py";
      try {
        rieszlab::emit_plot(csv_path, script_path);
      } catch (const rieszlab::ConfigError& e) {
        std::cerr << "plot error: " << e.what() << "\n";
        return 1;
      }
      std::cout << "wrote " << script_path << "\n";
      return 0;
    }
    if (self->parsed()) {
      return rieszlab::selftest(std::cout) == 0 ? 0 : 1;
    }
    if (verify->parsed()) {
      const int bad = rieszlab::verify_witnesses(vcsv, vdir, vg0, vmu, std::cout);
      return bad == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
