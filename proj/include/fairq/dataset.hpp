#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairq/gaussian.hpp"
#include "fairq/rng.hpp"

namespace fairq {

struct DatasetError : std::runtime_error {
  explicit DatasetError(const std::string& what) : std::runtime_error(what) {}
};

// Rows of (features, target, sensitive). The sensitive column is the
// possibly-noisy observable one; rows where sensitive_present is false form
// the missing part. true_sensitive keeps the pre-injection values so oracle
// modes and evaluation can use the ground truth.
struct LabeledDataset {
  std::vector<double> features;  // row-major n x d
  std::vector<double> targets;
  std::vector<double> sensitive;
  std::vector<bool> sensitive_present;
  std::vector<double> true_sensitive;
  bool ground_truth_complete = true;  // false when a source file genuinely lacked values
  int dim = 0;
  std::string name;

  size_t rows() const { return targets.size(); }
  std::vector<size_t> present_rows() const;
  std::vector<double> feature_row(size_t i) const;
  void check() const;
};

enum class PresetName { Gen2, Fair2, A2, Gen3, Fair3, A3 };

struct CovariancePreset {
  PresetName name;
  SymMatrix matrix;  // (d+2) square, block order x..., y, e
};

CovariancePreset covariance_preset(PresetName name);
CovariancePreset covariance_preset(const std::string& name);
const char* to_string(PresetName name);

enum class InjectorKind { KeepN, GaussianNoise, ThresholdNoise };

struct UncertaintyInjector {
  InjectorKind kind = InjectorKind::KeepN;
  long long n_keep = 0;    // KeepN
  double sigma = 0.0;      // noise std
  double threshold = 1.0;  // ThresholdNoise: perturb only |e| >= threshold
};

// n_rows i.i.d. draws from the zero-mean Gaussian with the given joint
// covariance; the last two columns become target and sensitive.
LabeledDataset sample_joint(const JointGaussianSpec& spec, size_t n_rows, std::uint64_t seed);

// Features and targets are never touched; only the observable sensitive
// column and its presence mask change.
LabeledDataset inject(const LabeledDataset& data, const UncertaintyInjector& injector, std::uint64_t seed);

// Plug-in CCM estimate from the present sensitive rows. With known_marginals
// the whitening uses the spec's Sigma_xx and Sigma_ee; otherwise both are
// estimated from the data.
CcmVector estimate_bex(const LabeledDataset& data, const JointGaussianSpec& spec,
                       bool known_marginals = true);

struct CsvSchema {
  std::vector<std::string> feature_cols;
  std::string target_col;
  std::string sensitive_col;
  std::string missing_marker = "?";
  bool normalize = false;  // min-max scale features and target to [0, 1]
};

// Comma-separated with a header row; rows with missing features are dropped,
// a missing_marker in the sensitive column marks the row as missing.
LabeledDataset load_csv(const std::string& path, const CsvSchema& schema);

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data, double ratio, std::uint64_t seed);

// Synthetic binary-classification set: group-dependent Gaussian features and
// a label correlated with the group.
struct MixtureParams {
  size_t n_rows = 4000;
  int dim = 5;
  double mean_shift = 1.0;   // feature mean offset along the first coordinates
  double label_gamma = 1.5;  // group term in the label logit
};

LabeledDataset sample_group_mixture(const MixtureParams& params, std::uint64_t seed);

}  // namespace fairq
