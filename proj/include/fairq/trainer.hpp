#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fairq/dataset.hpp"
#include "fairq/metrics.hpp"
#include "fairq/nn.hpp"

namespace fairq {

struct TrainerError : std::runtime_error {
  explicit TrainerError(const std::string& what) : std::runtime_error(what) {}
};

enum class TrainerMode { BootstrapS, Baseline, Oracle };

TrainerMode trainer_mode_from_string(const std::string& s);
const char* to_string(TrainerMode m);

enum class TaskKind { Classification, Regression };

struct TrainerConfig {
  int s_subsamples = 5;        // S; ignored in Baseline/Oracle modes
  long long subsample_k = 0;   // k; 0 means k = n (classic bootstrap)
  double epsilon = 0.05;
  double lambda_init = 10.0;   // 10 for classification, 5 for regression
  double model_lr = 1e-3;
  double dual_lr = 1e-2;
  int epochs = 30;
  int batch_size = 128;
  double weight_decay = 0.0;
  int hidden_width = 80;
  int min_batch_members = 8;  // constraints with fewer members in a batch are skipped
  FairnessMeasureKind measure = FairnessMeasureKind::Chi2Independence;
  SoftHistogramConfig histogram;
  TrainerMode mode = TrainerMode::BootstrapS;
  TaskKind task = TaskKind::Classification;
  std::uint64_t seed = 0;
};

struct EpochStats {
  double loss = 0.0;                     // mean prediction loss over batches
  std::vector<double> constraint_values; // full-set fairness value per constraint
  std::vector<double> duals;             // after the epoch's dual update
};

struct TrainReport {
  std::vector<double> final_params;
  std::vector<EpochStats> epochs;
  double test_error_or_mse = 0.0;
  std::map<std::string, double> test_fairness;
  std::vector<double> test_predictions;
};

// index multisets of size k drawn with replacement from [0, n)
std::vector<std::vector<size_t>> draw_subsamples(size_t n, size_t k, int s, std::uint64_t seed);

struct TrainerState {
  Mlp model;
  OptimState model_optim;
  std::vector<double> duals;                      // lambda, lambda_1..lambda_S
  std::vector<std::vector<size_t>> constraint_rows;  // dataset rows per constraint (multisets)
};

// one pass over the data: minibatch model updates with dual-weighted fairness
// penalty gradients, then one projected dual ascent step on full-set values
EpochStats lagrangian_epoch(TrainerState& state, const LabeledDataset& train, const TrainerConfig& cfg,
                            Rng& shuffle_rng);

TrainReport train(const LabeledDataset& train_data, const LabeledDataset& test_data,
                  const TrainerConfig& cfg);

std::map<std::string, double> evaluate(Mlp& model, const LabeledDataset& test,
                                       const std::vector<FairnessMeasureKind>& measures, TaskKind task,
                                       const SoftHistogramConfig& histogram,
                                       std::vector<double>* predictions_out = nullptr);

}  // namespace fairq
