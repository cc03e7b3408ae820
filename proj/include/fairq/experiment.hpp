#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fairq/dataset.hpp"
#include "fairq/robust.hpp"
#include "fairq/trainer.hpp"

namespace fairq {

struct ExperimentError : std::runtime_error {
  explicit ExperimentError(const std::string& what) : std::runtime_error(what) {}
};

enum class MethodKind { Oracle, Baseline, RobustQcqp, BootstrapS };

struct MethodSpec {
  MethodKind kind = MethodKind::Baseline;
  int s = 0;  // subsample count for BootstrapS
  std::string label() const;
};

MethodSpec method_from_string(const std::string& s);

enum class OutputFormat { Csv, Json };

// ---- Gaussian solver experiments (missing attributes / noisy attributes) ----

struct GaussianExperimentConfig {
  bool noise_experiment = false;  // false: missing-at-random over n_grid
  JointGaussianSpec spec;
  std::string preset_name = "custom";
  std::vector<MethodSpec> methods;
  double epsilon = 0.075;
  std::vector<long long> n_grid;      // missing experiment
  std::vector<double> sigma_grid;     // noise experiment
  bool threshold_noise = false;       // noise applied only at |e| >= noise_threshold
  double noise_threshold = 1.0;
  long long rows_per_trial = 0;       // N; defaults to max(n_grid) or 1000 for noise
  long long noise_n_keep = 0;         // optional missingness in the noise experiment (0: keep all)
  int trials = 1000;
  std::uint64_t seed = 1;
  double delta_conf = 0.05;
  double constant_c = 1.0;
  int bootstrap_grid_n = 10000;
  long long histogram_at_n = 0;  // 0: no histogram
  int histogram_bins = 40;
  int threads = 0;  // 0: hardware concurrency (FAIRQ_THREADS overrides)

  void validate() const;
};

struct ResultRow {
  std::string method;
  double x = 0.0;  // n or sigma
  long long trial = 0;
  double objective = 0.0;
  double mse = 0.0;
  double true_constraint_value = 0.0;
  bool violated = false;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

struct GaussianSummaryRow {
  std::string method;
  double x = 0.0;
  long long trials = 0;
  double violation_fraction = 0.0;
  double mean_objective = 0.0;
  double mean_mse = 0.0;
};

struct HistogramRow {
  std::string method;
  double bin_lo = 0.0;
  double bin_hi = 0.0;
  long long count = 0;
};

struct GaussianExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<GaussianSummaryRow> summary;
  std::vector<HistogramRow> histogram;
  long long failed_trials = 0;
};

GaussianExperimentResult run_gaussian_experiment(const GaussianExperimentConfig& cfg);

// ---- Bootstrap-S training sweeps ----

struct SweepConfig {
  std::string dataset_kind = "mixture";  // "mixture" or "csv"
  MixtureParams mixture;
  std::string csv_path;
  CsvSchema csv_schema;
  UncertaintyInjector injector;
  bool inject_train_only = true;  // evaluation always uses ground truth
  std::vector<MethodSpec> methods;
  std::vector<double> epsilons;
  int trials = 50;
  double split_ratio = 0.8;
  TrainerConfig trainer;  // mode/seed/epsilon overwritten per run
  int moving_average = 5;
  std::uint64_t seed = 1;
  int threads = 0;
  bool fresh_data_per_trial = true;  // mixture only; csv data is fixed

  void validate() const;
};

struct SweepRow {
  std::string method;
  double epsilon = 0.0;
  long long trial = 0;
  double error_or_mse = 0.0;
  std::map<std::string, double> fairness;
};

struct FrontierRow {
  std::string method;
  double epsilon = 0.0;
  double mean_error_or_mse = 0.0;
  double mean_primary_fairness = 0.0;  // dp_gap (classification) or chi2 (regression)
  double ma_error_or_mse = 0.0;        // centered 5-entry moving average
  double ma_primary_fairness = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<FrontierRow> frontier;
  std::string primary_fairness_name;
};

SweepResult run_bootstrap_sweep(const SweepConfig& cfg);

// ---- config & output ----

GaussianExperimentConfig load_gaussian_config(const std::string& path);
SweepConfig load_sweep_config(const std::string& path);

// Writes <prefix>_rows.<ext> and <prefix>_summary.<ext> (plus
// <prefix>_histogram.<ext> when present) with a schema comment header.
// Deterministic column order and shortest round-trip number formatting.
std::vector<std::string> emit(const GaussianExperimentResult& result, const std::string& out_dir,
                              const std::string& prefix, OutputFormat format);
std::vector<std::string> emit(const SweepResult& result, const std::string& out_dir,
                              const std::string& prefix, OutputFormat format);

std::string format_double(double v);  // shortest round-trip decimal
int resolve_threads(int requested);

}  // namespace fairq
