#include "fairq/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fairq {

TrainerMode trainer_mode_from_string(const std::string& s) {
  if (s == "bootstrap" || s == "bootstrap_s") return TrainerMode::BootstrapS;
  if (s == "baseline") return TrainerMode::Baseline;
  if (s == "oracle") return TrainerMode::Oracle;
  throw TrainerError("unknown trainer mode: " + s);
}

const char* to_string(TrainerMode m) {
  switch (m) {
    case TrainerMode::BootstrapS: return "bootstrap";
    case TrainerMode::Baseline: return "baseline";
    case TrainerMode::Oracle: return "oracle";
  }
  return "?";
}

std::vector<std::vector<size_t>> draw_subsamples(size_t n, size_t k, int s, std::uint64_t seed) {
  if (n == 0) throw TrainerError("draw_subsamples: empty uncertain set");
  if (k == 0) throw TrainerError("draw_subsamples: k must be at least 1");
  Rng rng(seed);
  std::vector<std::vector<size_t>> out;
  out.reserve(static_cast<size_t>(std::max(0, s)));
  for (int i = 0; i < s; ++i) {
    std::vector<size_t> multiset(k);
    for (size_t j = 0; j < k; ++j) multiset[j] = static_cast<size_t>(rng.below(n));
    out.push_back(std::move(multiset));
  }
  return out;
}

namespace {

struct ConstraintSet {
  // per constraint: dataset row indices (with multiplicity) and the
  // sensitive value used for that constraint
  std::vector<std::vector<size_t>> rows;
  std::vector<std::vector<double>> sens;
};

MeasureValue measure_eval(FairnessMeasureKind kind, const std::vector<double>& pred,
                          const std::vector<double>& sens, const std::vector<double>& target,
                          const SoftHistogramConfig& hist, bool with_grad) {
  switch (kind) {
    case FairnessMeasureKind::Chi2Independence:
      return chi2_independence(pred, sens, hist, with_grad);
    case FairnessMeasureKind::Chi2Separation:
      return chi2_separation(pred, sens, target, hist, with_grad);
    case FairnessMeasureKind::DbarIndependence:
      return dbar_independence_measure(pred, sens, with_grad);
    default:
      throw TrainerError("measure is not differentiable; use chi2 or dbar for training");
  }
}

std::vector<int> binary_labels(const std::vector<double>& v, const char* what) {
  std::set<double> levels(v.begin(), v.end());
  if (levels.size() > 2) throw TrainerError(std::string(what) + " is not binary");
  std::vector<int> out(v.size());
  const double hi = *levels.rbegin();
  for (size_t i = 0; i < v.size(); ++i) out[i] = (levels.size() == 2 && v[i] == hi) ? 1 : 0;
  return out;
}

}  // namespace

EpochStats lagrangian_epoch(TrainerState& state, const LabeledDataset& train, const TrainerConfig& cfg,
                            Rng& shuffle_rng) {
  for (double d : state.duals)
    if (d < 0.0) throw TrainerError("lagrangian_epoch: negative dual");
  const size_t n = train.rows();
  const int d = train.dim;
  const size_t n_constraints = state.constraint_rows.size();

  // per-constraint multiplicity of each dataset row, for batch membership
  std::vector<std::vector<int>> multiplicity(n_constraints, std::vector<int>(n, 0));
  for (size_t c = 0; c < n_constraints; ++c)
    for (size_t row : state.constraint_rows[c]) multiplicity[c][row]++;

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  shuffle_rng.shuffle(order);

  EpochStats stats;
  int n_batches = 0;
  const bool oracle = cfg.mode == TrainerMode::Oracle;

  for (size_t start = 0; start < n; start += static_cast<size_t>(cfg.batch_size)) {
    const size_t end = std::min(n, start + static_cast<size_t>(cfg.batch_size));
    const size_t bs = end - start;
    std::vector<double> bx(bs * static_cast<size_t>(d));
    std::vector<double> by(bs);
    for (size_t r = 0; r < bs; ++r) {
      const size_t row = order[start + r];
      for (int j = 0; j < d; ++j)
        bx[r * static_cast<size_t>(d) + static_cast<size_t>(j)] =
            train.features[row * static_cast<size_t>(d) + static_cast<size_t>(j)];
      by[r] = train.targets[row];
    }

    const std::vector<double> pred = state.model.forward(bx, static_cast<int>(bs));
    std::vector<double> upstream;
    const double loss = cfg.task == TaskKind::Classification ? log_loss(pred, by, &upstream)
                                                             : mse_loss(pred, by, &upstream);
    if (!std::isfinite(loss)) throw TrainerError("non-finite prediction loss");
    stats.loss += loss;
    ++n_batches;

    // dual-weighted fairness penalty gradients on this batch's members
    for (size_t c = 0; c < n_constraints; ++c) {
      if (state.duals[c] == 0.0) continue;
      std::vector<size_t> member_pos;
      for (size_t r = 0; r < bs; ++r) {
        const size_t row = order[start + r];
        for (int m = 0; m < multiplicity[c][row]; ++m) member_pos.push_back(r);
      }
      if (static_cast<int>(member_pos.size()) < cfg.min_batch_members) continue;
      std::vector<double> mp(member_pos.size()), msens(member_pos.size()), mtarget(member_pos.size());
      for (size_t m = 0; m < member_pos.size(); ++m) {
        const size_t row = order[start + member_pos[m]];
        mp[m] = pred[member_pos[m]];
        msens[m] = oracle ? train.true_sensitive[row] : train.sensitive[row];
        mtarget[m] = train.targets[row];
      }
      const MeasureValue mv = measure_eval(cfg.measure, mp, msens, mtarget, cfg.histogram, true);
      if (!std::isfinite(mv.value)) throw TrainerError("non-finite fairness penalty");
      for (size_t m = 0; m < member_pos.size(); ++m)
        upstream[member_pos[m]] += state.duals[c] * mv.grad_wrt_pred[m];
    }

    const std::vector<double> grads = state.model.backward(upstream);
    state.model_optim.step(state.model.params(), grads);
  }
  stats.loss /= std::max(1, n_batches);

  // full-set constraint values, then one projected dual ascent step each
  stats.constraint_values.resize(n_constraints);
  for (size_t c = 0; c < n_constraints; ++c) {
    const auto& rows = state.constraint_rows[c];
    std::vector<double> fx(rows.size() * static_cast<size_t>(d));
    std::vector<double> fsens(rows.size()), ftarget(rows.size());
    for (size_t m = 0; m < rows.size(); ++m) {
      for (int j = 0; j < d; ++j)
        fx[m * static_cast<size_t>(d) + static_cast<size_t>(j)] =
            train.features[rows[m] * static_cast<size_t>(d) + static_cast<size_t>(j)];
      fsens[m] = oracle ? train.true_sensitive[rows[m]] : train.sensitive[rows[m]];
      ftarget[m] = train.targets[rows[m]];
    }
    const std::vector<double> fpred = state.model.forward(fx, static_cast<int>(rows.size()));
    const MeasureValue mv = measure_eval(cfg.measure, fpred, fsens, ftarget, cfg.histogram, false);
    stats.constraint_values[c] = mv.value;
    state.duals[c] = std::max(0.0, state.duals[c] + cfg.dual_lr * (mv.value - cfg.epsilon));
  }
  stats.duals = state.duals;
  return stats;
}

TrainReport train(const LabeledDataset& train_data, const LabeledDataset& test_data,
                  const TrainerConfig& cfg) {
  train_data.check();
  test_data.check();
  if (cfg.epsilon <= 0.0) throw TrainerError("train: epsilon must be positive");

  const std::vector<size_t> present = train_data.present_rows();
  if (cfg.mode != TrainerMode::Oracle && present.empty())
    throw TrainerError("train: no labeled sensitive rows");
  if (cfg.mode == TrainerMode::Oracle && !train_data.ground_truth_complete)
    throw TrainerError("train: oracle mode needs fully observed sensitive attributes");

  TrainerState state{
      Mlp(MlpSpec{{train_data.dim, cfg.hidden_width,
                   cfg.task == TaskKind::Classification ? 2 : 1},
                  Activation::Selu,
                  cfg.task == TaskKind::Classification ? OutputHead::Softmax2 : OutputHead::Linear,
                  Rng::stream(cfg.seed, 0).bits()}),
      OptimState{},
      {},
      {}};
  state.model_optim.kind = OptimKind::Adam;
  state.model_optim.learning_rate = cfg.model_lr;
  state.model_optim.weight_decay = cfg.weight_decay;

  // constraint 0 is the base set: D^(u) (or everything, for the oracle)
  if (cfg.mode == TrainerMode::Oracle) {
    std::vector<size_t> all(train_data.rows());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;
    state.constraint_rows.push_back(all);
  } else {
    state.constraint_rows.push_back(present);
  }

  if (cfg.mode == TrainerMode::BootstrapS && cfg.s_subsamples > 0) {
    const size_t k = cfg.subsample_k > 0 ? static_cast<size_t>(cfg.subsample_k) : present.size();
    if (k > 0) {
      const auto subsets =
          draw_subsamples(present.size(), k, cfg.s_subsamples, Rng::stream(cfg.seed, 2).bits());
      for (const auto& subset : subsets) {
        std::vector<size_t> rows;
        rows.reserve(subset.size());
        for (size_t j : subset) rows.push_back(present[j]);
        state.constraint_rows.push_back(std::move(rows));
      }
    }
  }
  state.duals.assign(state.constraint_rows.size(), cfg.lambda_init);

  Rng shuffle_rng = Rng::stream(cfg.seed, 1);
  TrainReport report;
  for (int e = 0; e < cfg.epochs; ++e)
    report.epochs.push_back(lagrangian_epoch(state, train_data, cfg, shuffle_rng));

  report.final_params = state.model.params();
  std::vector<FairnessMeasureKind> eval_measures;
  if (cfg.task == TaskKind::Classification) {
    eval_measures = {FairnessMeasureKind::DpGap, FairnessMeasureKind::EoGap,
                     FairnessMeasureKind::Chi2Independence};
  } else {
    eval_measures = {FairnessMeasureKind::Chi2Independence, FairnessMeasureKind::Chi2Separation};
  }
  const auto metrics =
      evaluate(state.model, test_data, eval_measures, cfg.task, cfg.histogram, &report.test_predictions);
  report.test_fairness = metrics;
  report.test_error_or_mse =
      metrics.at(cfg.task == TaskKind::Classification ? "error_rate" : "mse");
  return report;
}

std::map<std::string, double> evaluate(Mlp& model, const LabeledDataset& test,
                                       const std::vector<FairnessMeasureKind>& measures, TaskKind task,
                                       const SoftHistogramConfig& histogram,
                                       std::vector<double>* predictions_out) {
  test.check();
  if (test.rows() == 0) throw TrainerError("evaluate: empty test set");
  if (!test.ground_truth_complete)
    throw TrainerError("evaluate: test set lacks true sensitive attributes");

  const std::vector<double> pred = model.forward(test.features, static_cast<int>(test.rows()));
  if (predictions_out) *predictions_out = pred;

  std::map<std::string, double> out;
  if (task == TaskKind::Classification) {
    size_t wrong = 0;
    for (size_t i = 0; i < pred.size(); ++i)
      if ((pred[i] >= 0.5 ? 1.0 : 0.0) != test.targets[i]) ++wrong;
    out["error_rate"] = static_cast<double>(wrong) / static_cast<double>(pred.size());
  } else {
    out["mse"] = mse_loss(pred, test.targets, nullptr);
  }

  for (FairnessMeasureKind kind : measures) {
    switch (kind) {
      case FairnessMeasureKind::DpGap: {
        std::vector<int> labels(pred.size());
        for (size_t i = 0; i < pred.size(); ++i) labels[i] = pred[i] >= 0.5 ? 1 : 0;
        out["dp_gap"] = dp_gap(labels, binary_labels(test.true_sensitive, "sensitive attribute"));
        break;
      }
      case FairnessMeasureKind::EoGap: {
        std::vector<int> labels(pred.size());
        for (size_t i = 0; i < pred.size(); ++i) labels[i] = pred[i] >= 0.5 ? 1 : 0;
        out["eo_gap"] = eo_gap(labels, binary_labels(test.true_sensitive, "sensitive attribute"),
                               binary_labels(test.targets, "target"));
        break;
      }
      case FairnessMeasureKind::Chi2Independence:
        out["chi2_independence"] =
            chi2_independence(pred, test.true_sensitive, histogram, false).value;
        break;
      case FairnessMeasureKind::Chi2Separation:
        out["chi2_separation"] =
            chi2_separation(pred, test.true_sensitive, test.targets, histogram, false).value;
        break;
      case FairnessMeasureKind::DbarIndependence:
        out["dbar_independence"] = empirical_dbar(pred, test.true_sensitive);
        break;
    }
  }
  return out;
}

}  // namespace fairq
