#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rieszlab/config.hpp"

namespace rieszlab {

/// One CSV row of an experiment scan. Optional fields print as empty cells.
struct ResultRow {
  std::string experiment;
  std::string setting;
  int K = 0;
  int d = 0;
  std::optional<int> N;
  std::optional<double> p;
  std::optional<int> r;
  std::optional<double> sigma;
  std::optional<double> epsilon;
  std::optional<double> t;
  double estimate_lower = 0.0;
  std::optional<double> estimate_upper;
  std::string method;
  int iterations = 0;
  bool converged = true;
  std::string status = "ok";
  std::uint64_t seed = 0;
  double runtime_ms = 0.0;
  std::string witness_digest;
};

std::string csv_header();
std::string csv_line(const ResultRow& row);
void write_csv(const std::string& path, const std::vector<ResultRow>& rows);

struct RunResult {
  std::vector<ResultRow> rows;
  int exit_code = 0;  // 0 ok, 2 if any row failed to converge or errored
};

/// Runs every experiment in the config; writes the CSV to cfg.out and, when
/// cfg.witness_dir is set, one witness file per row. Throws ConfigError on
/// invalid configuration (exit code 1 at the CLI).
RunResult run_experiments(const ExperimentConfig& cfg);

/// Emits a self-contained python plotting script for a dimscan CSV
/// (estimate_lower, and upper when present, vs d; one series per p).
/// Byte-deterministic for identical input.
void emit_plot(const std::string& csv_path, const std::string& script_path);

/// Re-derives estimate_lower of each row from the stored witness files.
/// Returns the number of mismatches; logs one line per row.
int verify_witnesses(const std::string& csv_path, const std::string& witness_dir,
                     int g0, const std::string& mu, std::ostream& log);

/// Fast invariant battery; returns the number of failed checks.
int selftest(std::ostream& log);

}  // namespace rieszlab
