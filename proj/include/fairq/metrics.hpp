#pragma once

#include <string>
#include <vector>

#include "fairq/gaussian.hpp"

namespace fairq {

struct MetricsError : std::runtime_error {
  explicit MetricsError(const std::string& what) : std::runtime_error(what) {}
};

enum class RangePolicy { FixedUnit, DataMinMax };

struct SoftHistogramConfig {
  int n_bins = 10;
  double bandwidth = 0.1;  // kernel width as a fraction of the bin range
  RangePolicy range_policy = RangePolicy::FixedUnit;
};

enum class FairnessMeasureKind { Chi2Independence, Chi2Separation, DbarIndependence, DpGap, EoGap };

const char* to_string(FairnessMeasureKind k);
FairnessMeasureKind measure_from_string(const std::string& s);

struct MeasureValue {
  double value = 0.0;
  std::vector<double> grad_wrt_pred;  // empty for the non-differentiable gap metrics
  bool degenerate_marginal = false;   // some sensitive category had < 2 samples
};

// chi^2 dependence between predictions and the sensitive attribute, estimated
// on a kernel-smoothed 2-D histogram so the value is differentiable in the
// predictions. Sensitive values with at most two distinct levels are treated
// as exact categories; anything else is soft-binned like the predictions.
MeasureValue chi2_independence(const std::vector<double>& pred, const std::vector<double>& sens,
                               const SoftHistogramConfig& cfg, bool with_grad = true);

// target-stratified chi^2 (separation); continuous targets are split into
// equiprobable bins, empty strata are skipped with weight renormalization
MeasureValue chi2_separation(const std::vector<double>& pred, const std::vector<double>& sens,
                             const std::vector<double>& target, const SoftHistogramConfig& cfg,
                             bool with_grad = true);

// |P(pred=1 | e=1) - P(pred=1 | e=0)|
double dp_gap(const std::vector<int>& pred_labels, const std::vector<int>& sens);

// dp_gap restricted to the y = 1 stratum
double eo_gap(const std::vector<int>& pred_labels, const std::vector<int>& sens,
              const std::vector<int>& target);

// empirical covariance of the centered pair, fed through the Gaussian
// independence divergence (squared empirical correlation)
double empirical_dbar(const std::vector<double>& pred, const std::vector<double>& sens);

// same value with its exact gradient, for use as a training penalty
MeasureValue dbar_independence_measure(const std::vector<double>& pred, const std::vector<double>& sens,
                                       bool with_grad = true);

}  // namespace fairq
