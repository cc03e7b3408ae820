#include "fairq/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace fairq {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return Rng::stream(Rng::stream(master, a).bits(), b).bits();
}

// violations are counted beyond a 1e-9 slack: boundary-binding optima sit at
// exactly epsilon and must not flip on the last float bit
constexpr double kViolationSlack = 1e-9;

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void run_parallel(size_t n_tasks, int threads, const std::function<void(size_t)>& body) {
  if (threads <= 1 || n_tasks <= 1) {
    for (size_t i = 0; i < n_tasks; ++i) body(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  const int n_threads = std::min<size_t>(static_cast<size_t>(threads), n_tasks);
  pool.reserve(static_cast<size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= n_tasks) return;
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::string MethodSpec::label() const {
  switch (kind) {
    case MethodKind::Oracle: return "oracle";
    case MethodKind::Baseline: return "baseline";
    case MethodKind::RobustQcqp: return "robust";
    case MethodKind::BootstrapS: return "bootstrap" + std::to_string(s);
  }
  return "?";
}

MethodSpec method_from_string(const std::string& s) {
  MethodSpec m;
  if (s == "oracle") {
    m.kind = MethodKind::Oracle;
  } else if (s == "baseline") {
    m.kind = MethodKind::Baseline;
  } else if (s == "robust") {
    m.kind = MethodKind::RobustQcqp;
  } else if (s.rfind("bootstrap", 0) == 0) {
    m.kind = MethodKind::BootstrapS;
    const std::string arg = s.size() > 9 && s[9] == ':' ? s.substr(10) : s.substr(9);
    if (arg.empty()) throw ExperimentError("bootstrap method needs a subsample count, e.g. bootstrap:9");
    m.s = std::stoi(arg);
    if (m.s < 1) throw ExperimentError("bootstrap subsample count must be positive");
  } else {
    throw ExperimentError("unknown method: " + s);
  }
  return m;
}

int resolve_threads(int requested) {
  if (const char* env = std::getenv("FAIRQ_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void GaussianExperimentConfig::validate() const {
  if (methods.empty()) throw ExperimentError("config needs at least one method");
  if (trials < 1) throw ExperimentError("trials must be at least 1");
  if (epsilon <= 0.0) throw ExperimentError("epsilon must be positive");
  if (!noise_experiment && n_grid.empty()) throw ExperimentError("missing experiment needs n_grid");
  if (noise_experiment && sigma_grid.empty()) throw ExperimentError("noise experiment needs sigma_grid");
  for (long long n : n_grid)
    if (n < 1) throw ExperimentError("n_grid entries must be positive");
  if (noise_experiment)
    for (const MethodSpec& m : methods)
      if (m.kind == MethodKind::RobustQcqp)
        throw ExperimentError("the robust method is driven by tau(n); it has no noise-level counterpart");
  spec.validate();
}

GaussianExperimentResult run_gaussian_experiment(const GaussianExperimentConfig& cfg) {
  cfg.validate();
  const CcmVector b_yx = ccm(cfg.spec, "yx");
  const CcmVector b_ex_true = ccm(cfg.spec, "ex");
  const int d = cfg.spec.dim_x();

  const std::vector<double> xs = cfg.noise_experiment
                                     ? cfg.sigma_grid
                                     : [&] {
                                         std::vector<double> v;
                                         for (long long n : cfg.n_grid) v.push_back(static_cast<double>(n));
                                         return v;
                                       }();
  long long rows_per_trial = cfg.rows_per_trial;
  if (rows_per_trial <= 0) {
    if (cfg.noise_experiment) {
      rows_per_trial = 1000;
    } else {
      rows_per_trial = *std::max_element(cfg.n_grid.begin(), cfg.n_grid.end());
    }
  }

  const size_t n_methods = cfg.methods.size();
  const size_t n_x = xs.size();
  const size_t n_tasks = n_x * static_cast<size_t>(cfg.trials);

  struct Slot {
    ResultRow row;
    bool ok = false;
    bool failed = false;
  };
  std::vector<Slot> slots(n_tasks * n_methods);

  auto task_body = [&](size_t task) {
    const size_t xi = task / static_cast<size_t>(cfg.trials);
    const long long trial = static_cast<long long>(task % static_cast<size_t>(cfg.trials));
    const double x = xs[xi];

    try {
      const std::uint64_t data_seed = derive_seed(cfg.seed, 1000 + xi, static_cast<std::uint64_t>(trial));
      const std::uint64_t inject_seed = derive_seed(cfg.seed, 2000 + xi, static_cast<std::uint64_t>(trial));
      const std::uint64_t boot_seed = derive_seed(cfg.seed, 3000 + xi, static_cast<std::uint64_t>(trial));

      LabeledDataset data = sample_joint(cfg.spec, static_cast<size_t>(rows_per_trial), data_seed);
      long long n_labeled = rows_per_trial;
      if (cfg.noise_experiment) {
        UncertaintyInjector noise;
        noise.kind = cfg.threshold_noise ? InjectorKind::ThresholdNoise : InjectorKind::GaussianNoise;
        noise.sigma = x;
        noise.threshold = cfg.noise_threshold;
        data = inject(data, noise, inject_seed);
        if (cfg.noise_n_keep > 0) {
          UncertaintyInjector keep{InjectorKind::KeepN, cfg.noise_n_keep, 0.0, 0.0};
          data = inject(data, keep, derive_seed(cfg.seed, 4000 + xi, static_cast<std::uint64_t>(trial)));
          n_labeled = cfg.noise_n_keep;
        }
      } else {
        UncertaintyInjector keep{InjectorKind::KeepN, static_cast<long long>(x), 0.0, 0.0};
        data = inject(data, keep, inject_seed);
        n_labeled = static_cast<long long>(x);
      }

      const CcmVector b_hat = estimate_bex(data, cfg.spec, true);

      // bootstrap re-estimates share one stream per trial
      Rng boot_rng(boot_seed);
      const std::vector<size_t> present = data.present_rows();
      std::vector<std::vector<double>> pair_ex;  // per present row: e * x
      pair_ex.reserve(present.size());
      const PsdFactorResult white = sym_psd_inv_sqrt(cfg.spec.sigma_xx);
      for (size_t idx : present) {
        std::vector<double> ex(static_cast<size_t>(d));
        for (int j = 0; j < d; ++j)
          ex[static_cast<size_t>(j)] =
              data.sensitive[idx] * data.features[idx * static_cast<size_t>(d) + static_cast<size_t>(j)];
        pair_ex.push_back(std::move(ex));
      }
      auto bootstrap_estimate = [&]() {
        std::vector<double> cross(static_cast<size_t>(d), 0.0);
        for (size_t m = 0; m < pair_ex.size(); ++m) {
          const auto& ex = pair_ex[boot_rng.below(pair_ex.size())];
          for (int j = 0; j < d; ++j) cross[static_cast<size_t>(j)] += ex[static_cast<size_t>(j)];
        }
        for (double& v : cross) v /= static_cast<double>(pair_ex.size());
        std::vector<double> b = white.m.mul(cross);
        const double scale = 1.0 / std::sqrt(cfg.spec.sigma_ee);
        for (double& v : b) v *= scale;
        return b;
      };

      for (size_t mi = 0; mi < n_methods; ++mi) {
        const MethodSpec& method = cfg.methods[mi];
        std::vector<double> a;
        switch (method.kind) {
          case MethodKind::Oracle:
            a = solve(QcqpInstance{b_yx, b_ex_true, cfg.epsilon}).a_star;
            break;
          case MethodKind::Baseline:
            a = solve(QcqpInstance{b_yx, b_hat, cfg.epsilon}).a_star;
            break;
          case MethodKind::RobustQcqp: {
            const PlaneProjection plane = project_to_plane(b_yx, b_hat);
            UncertaintyConfig ucfg{cfg.delta_conf, cfg.constant_c, n_labeled};
            const double tau = tau_of_n(ucfg, cfg.spec);
            const AnnularSector sector = sector_from_ball(plane.b_ex_2d, tau);
            const QcqpSolution sol2 = solve_robust_three(plane.b_yx_2d, sector, cfg.epsilon);
            a.assign(static_cast<size_t>(d), 0.0);
            for (int i = 0; i < d; ++i)
              a[static_cast<size_t>(i)] = sol2.a_star[0] * plane.axis_y[static_cast<size_t>(i)] +
                                          sol2.a_star[1] * plane.axis_e[static_cast<size_t>(i)];
            break;
          }
          case MethodKind::BootstrapS: {
            std::vector<std::vector<double>> cons;
            cons.push_back(b_hat.entries);
            for (int si = 0; si < method.s; ++si) cons.push_back(bootstrap_estimate());
            a = solve_multi_constraint(b_yx.entries, cons, cfg.epsilon, cfg.bootstrap_grid_n).a_star;
            break;
          }
        }

        Slot& slot = slots[task * n_methods + mi];
        slot.row.method = method.label();
        slot.row.x = x;
        slot.row.trial = trial;
        slot.row.objective = [&] {
          const double inner = dot(a, b_yx.entries);
          return inner * inner;
        }();
        slot.row.mse = cfg.spec.sigma_yy * (1.0 - slot.row.objective);
        const double inner_e = dot(a, b_ex_true.entries);
        slot.row.true_constraint_value = inner_e * inner_e;
        slot.row.violated = slot.row.true_constraint_value > cfg.epsilon + kViolationSlack;
        slot.row.epsilon = cfg.epsilon;
        slot.row.seed = cfg.seed;
        slot.ok = true;
      }
    } catch (const std::exception&) {
      for (size_t mi = 0; mi < n_methods; ++mi) slots[task * n_methods + mi].failed = true;
    }
  };

  run_parallel(n_tasks, resolve_threads(cfg.threads), task_body);

  GaussianExperimentResult result;
  for (size_t mi = 0; mi < n_methods; ++mi)
    for (size_t xi = 0; xi < n_x; ++xi)
      for (long long trial = 0; trial < cfg.trials; ++trial) {
        const Slot& slot = slots[(xi * static_cast<size_t>(cfg.trials) + static_cast<size_t>(trial)) * n_methods + mi];
        if (slot.failed) {
          if (mi == 0) ++result.failed_trials;
          continue;
        }
        if (slot.ok) result.rows.push_back(slot.row);
      }

  for (size_t mi = 0; mi < n_methods; ++mi) {
    const std::string label = cfg.methods[mi].label();
    for (size_t xi = 0; xi < n_x; ++xi) {
      GaussianSummaryRow s;
      s.method = label;
      s.x = xs[xi];
      std::vector<double> objs, mses;
      long long violations = 0;
      for (const ResultRow& row : result.rows) {
        if (row.method != label || row.x != xs[xi]) continue;
        ++s.trials;
        objs.push_back(row.objective);
        mses.push_back(row.mse);
        if (row.violated) ++violations;
      }
      if (s.trials > 0) {
        s.violation_fraction = static_cast<double>(violations) / static_cast<double>(s.trials);
        s.mean_objective = mean_of(objs);
        s.mean_mse = mean_of(mses);
      }
      result.summary.push_back(s);
    }
  }

  if (!cfg.noise_experiment && cfg.histogram_at_n > 0) {
    const double hist_x = static_cast<double>(cfg.histogram_at_n);
    const double hi = 4.0 * cfg.epsilon;  // overflow bucket catches the tail
    const int bins = cfg.histogram_bins;
    for (size_t mi = 0; mi < n_methods; ++mi) {
      const std::string label = cfg.methods[mi].label();
      std::vector<long long> counts(static_cast<size_t>(bins) + 1, 0);
      for (const ResultRow& row : result.rows) {
        if (row.method != label || row.x != hist_x) continue;
        int b = static_cast<int>(std::floor(row.true_constraint_value / hi * bins));
        if (b < 0) b = 0;
        if (b > bins) b = bins;
        counts[static_cast<size_t>(b)]++;
      }
      for (int b = 0; b <= bins; ++b) {
        HistogramRow h;
        h.method = label;
        h.bin_lo = hi * b / bins;
        h.bin_hi = b == bins ? std::numeric_limits<double>::infinity() : hi * (b + 1) / bins;
        h.count = counts[static_cast<size_t>(b)];
        result.histogram.push_back(h);
      }
    }
  }
  return result;
}

void SweepConfig::validate() const {
  if (methods.empty()) throw ExperimentError("config needs at least one method");
  if (epsilons.empty()) throw ExperimentError("epsilon sweep is empty");
  if (trials < 1) throw ExperimentError("trials must be at least 1");
  if (split_ratio <= 0.0 || split_ratio >= 1.0) throw ExperimentError("split_ratio must be in (0, 1)");
  if (dataset_kind != "mixture" && dataset_kind != "csv")
    throw ExperimentError("dataset kind must be mixture or csv");
  for (const MethodSpec& m : methods)
    if (m.kind == MethodKind::RobustQcqp)
      throw ExperimentError("the robust QCQP is a Gaussian-experiment method; sweeps train models");
  for (double e : epsilons)
    if (e <= 0.0) throw ExperimentError("sweep epsilons must be positive");
}

SweepResult run_bootstrap_sweep(const SweepConfig& cfg) {
  cfg.validate();

  LabeledDataset base;
  if (cfg.dataset_kind == "csv") base = load_csv(cfg.csv_path, cfg.csv_schema);

  // one train/test pair per trial, shared by every method and epsilon
  struct TrialData {
    LabeledDataset train;
    LabeledDataset test;
  };
  std::vector<TrialData> trials_data;
  trials_data.reserve(static_cast<size_t>(cfg.trials));
  for (long long trial = 0; trial < cfg.trials; ++trial) {
    LabeledDataset data;
    if (cfg.dataset_kind == "mixture") {
      const std::uint64_t data_seed =
          cfg.fresh_data_per_trial ? derive_seed(cfg.seed, 10, static_cast<std::uint64_t>(trial))
                                   : derive_seed(cfg.seed, 10, 0);
      data = sample_group_mixture(cfg.mixture, data_seed);
    } else {
      data = base;
    }
    auto [train, test] = split(data, cfg.split_ratio, derive_seed(cfg.seed, 11, static_cast<std::uint64_t>(trial)));
    if (cfg.injector.kind != InjectorKind::KeepN || cfg.injector.n_keep < static_cast<long long>(train.rows()))
      train = inject(train, cfg.injector, derive_seed(cfg.seed, 12, static_cast<std::uint64_t>(trial)));
    trials_data.push_back({std::move(train), std::move(test)});
  }

  const size_t n_eps = cfg.epsilons.size();
  const size_t n_methods = cfg.methods.size();
  const size_t n_tasks = n_eps * static_cast<size_t>(cfg.trials) * n_methods;
  std::vector<SweepRow> rows(n_tasks);
  std::vector<char> ok(n_tasks, 0);

  auto body = [&](size_t task) {
    const size_t ei = task / (static_cast<size_t>(cfg.trials) * n_methods);
    const size_t rem = task % (static_cast<size_t>(cfg.trials) * n_methods);
    const long long trial = static_cast<long long>(rem / n_methods);
    const size_t mi = rem % n_methods;
    const MethodSpec& method = cfg.methods[mi];

    TrainerConfig tcfg = cfg.trainer;
    tcfg.epsilon = cfg.epsilons[ei];
    tcfg.seed = derive_seed(cfg.seed, 20, static_cast<std::uint64_t>(trial));
    switch (method.kind) {
      case MethodKind::Oracle: tcfg.mode = TrainerMode::Oracle; break;
      case MethodKind::Baseline: tcfg.mode = TrainerMode::Baseline; break;
      case MethodKind::BootstrapS:
        tcfg.mode = TrainerMode::BootstrapS;
        tcfg.s_subsamples = method.s;
        break;
      default: break;
    }

    try {
      const TrainReport report =
          train(trials_data[static_cast<size_t>(trial)].train, trials_data[static_cast<size_t>(trial)].test, tcfg);
      SweepRow& row = rows[task];
      row.method = method.label();
      row.epsilon = cfg.epsilons[ei];
      row.trial = trial;
      row.error_or_mse = report.test_error_or_mse;
      row.fairness = report.test_fairness;
      ok[task] = 1;
    } catch (const std::exception&) {
      ok[task] = 0;
    }
  };

  run_parallel(n_tasks, resolve_threads(cfg.threads), body);

  SweepResult result;
  if (cfg.trainer.task == TaskKind::Classification)
    result.primary_fairness_name =
        cfg.trainer.measure == FairnessMeasureKind::Chi2Separation ? "eo_gap" : "dp_gap";
  else
    result.primary_fairness_name = cfg.trainer.measure == FairnessMeasureKind::Chi2Separation
                                       ? "chi2_separation"
                                       : "chi2_independence";

  for (size_t mi = 0; mi < n_methods; ++mi)
    for (size_t ei = 0; ei < n_eps; ++ei)
      for (long long trial = 0; trial < cfg.trials; ++trial) {
        const size_t task = ei * (static_cast<size_t>(cfg.trials) * n_methods) +
                            static_cast<size_t>(trial) * n_methods + mi;
        if (ok[task]) result.rows.push_back(rows[task]);
      }

  for (size_t mi = 0; mi < n_methods; ++mi) {
    const std::string label = cfg.methods[mi].label();
    std::vector<FrontierRow> rows_m;
    for (size_t ei = 0; ei < n_eps; ++ei) {
      FrontierRow f;
      f.method = label;
      f.epsilon = cfg.epsilons[ei];
      std::vector<double> errs, fair;
      for (const SweepRow& row : result.rows) {
        if (row.method != label || row.epsilon != cfg.epsilons[ei]) continue;
        errs.push_back(row.error_or_mse);
        const auto it = row.fairness.find(result.primary_fairness_name);
        if (it != row.fairness.end()) fair.push_back(it->second);
      }
      f.mean_error_or_mse = mean_of(errs);
      f.mean_primary_fairness = mean_of(fair);
      rows_m.push_back(f);
    }
    // centered moving average over the epsilon-sorted frontier
    const int w = std::max(1, cfg.moving_average);
    for (size_t i = 0; i < rows_m.size(); ++i) {
      const size_t lo = i >= static_cast<size_t>(w / 2) ? i - static_cast<size_t>(w / 2) : 0;
      const size_t hi = std::min(rows_m.size(), i + static_cast<size_t>(w - w / 2));
      double se = 0.0, sf = 0.0;
      for (size_t j = lo; j < hi; ++j) {
        se += rows_m[j].mean_error_or_mse;
        sf += rows_m[j].mean_primary_fairness;
      }
      rows_m[i].ma_error_or_mse = se / static_cast<double>(hi - lo);
      rows_m[i].ma_primary_fairness = sf / static_cast<double>(hi - lo);
    }
    result.frontier.insert(result.frontier.end(), rows_m.begin(), rows_m.end());
  }
  return result;
}

// ---------------- config loading ----------------

namespace {

JointGaussianSpec spec_from_json(const json& j) {
  if (j.contains("preset")) {
    const CovariancePreset preset = covariance_preset(j.at("preset").get<std::string>());
    return JointGaussianSpec::from_full(preset.matrix);
  }
  if (!j.contains("sigma")) throw ExperimentError("config needs a preset or a sigma matrix");
  const auto rows = j.at("sigma").get<std::vector<std::vector<double>>>();
  return JointGaussianSpec::from_full(SymMatrix::from_rows(rows));
}

std::vector<MethodSpec> methods_from_json(const json& j) {
  std::vector<MethodSpec> out;
  for (const auto& m : j.at("methods")) out.push_back(method_from_string(m.get<std::string>()));
  return out;
}

}  // namespace

GaussianExperimentConfig load_gaussian_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ExperimentError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ExperimentError(std::string("config parse error: ") + e.what());
  }
  GaussianExperimentConfig cfg;
  const std::string kind = j.value("experiment", "gaussian_missing");
  if (kind == "gaussian_missing")
    cfg.noise_experiment = false;
  else if (kind == "gaussian_noise")
    cfg.noise_experiment = true;
  else
    throw ExperimentError("experiment must be gaussian_missing or gaussian_noise");
  cfg.spec = spec_from_json(j);
  cfg.preset_name = j.value("preset", "custom");
  cfg.methods = methods_from_json(j);
  cfg.epsilon = j.at("epsilon").get<double>();
  if (j.contains("n_grid")) cfg.n_grid = j.at("n_grid").get<std::vector<long long>>();
  if (j.contains("sigma_grid")) cfg.sigma_grid = j.at("sigma_grid").get<std::vector<double>>();
  cfg.threshold_noise = j.value("threshold_noise", false);
  cfg.noise_threshold = j.value("noise_threshold", cfg.spec.sigma_ee);
  cfg.rows_per_trial = j.value("rows_per_trial", 0LL);
  cfg.noise_n_keep = j.value("noise_n_keep", 0LL);
  cfg.trials = j.value("trials", 1000);
  cfg.seed = j.value("seed", 1ULL);
  cfg.delta_conf = j.value("delta_conf", 0.05);
  cfg.constant_c = j.value("constant_c", 1.0);
  cfg.bootstrap_grid_n = j.value("bootstrap_grid_n", 10000);
  cfg.histogram_at_n = j.value("histogram_at_n", 0LL);
  cfg.histogram_bins = j.value("histogram_bins", 40);
  cfg.threads = j.value("threads", 0);
  cfg.validate();
  return cfg;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ExperimentError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ExperimentError(std::string("config parse error: ") + e.what());
  }
  SweepConfig cfg;
  const json& ds = j.at("dataset");
  cfg.dataset_kind = ds.at("kind").get<std::string>();
  if (cfg.dataset_kind == "mixture") {
    cfg.mixture.n_rows = ds.value("n_rows", 4000ULL);
    cfg.mixture.dim = ds.value("dim", 5);
    cfg.mixture.mean_shift = ds.value("mean_shift", 1.0);
    cfg.mixture.label_gamma = ds.value("label_gamma", 1.5);
  } else {
    cfg.csv_path = ds.at("path").get<std::string>();
    cfg.csv_schema.feature_cols = ds.at("features").get<std::vector<std::string>>();
    cfg.csv_schema.target_col = ds.at("target").get<std::string>();
    cfg.csv_schema.sensitive_col = ds.at("sensitive").get<std::string>();
    cfg.csv_schema.missing_marker = ds.value("missing_marker", "?");
    cfg.csv_schema.normalize = ds.value("normalize", false);
  }
  if (j.contains("injector")) {
    const json& inj = j.at("injector");
    const std::string kind = inj.at("kind").get<std::string>();
    if (kind == "keep_n") {
      cfg.injector.kind = InjectorKind::KeepN;
      cfg.injector.n_keep = inj.at("n_keep").get<long long>();
    } else if (kind == "gaussian_noise") {
      cfg.injector.kind = InjectorKind::GaussianNoise;
      cfg.injector.sigma = inj.at("sigma").get<double>();
    } else if (kind == "threshold_noise") {
      cfg.injector.kind = InjectorKind::ThresholdNoise;
      cfg.injector.sigma = inj.at("sigma").get<double>();
      cfg.injector.threshold = inj.at("threshold").get<double>();
    } else {
      throw ExperimentError("unknown injector kind: " + kind);
    }
  } else {
    cfg.injector.kind = InjectorKind::KeepN;
    cfg.injector.n_keep = std::numeric_limits<long long>::max();
  }
  cfg.methods = methods_from_json(j);
  if (j.contains("epsilons")) {
    cfg.epsilons = j.at("epsilons").get<std::vector<double>>();
  } else {
    const json& sweep = j.at("epsilon_sweep");
    const double lo = sweep.at("min").get<double>();
    const double hi = sweep.at("max").get<double>();
    const int count = sweep.at("count").get<int>();
    if (count < 1) throw ExperimentError("epsilon_sweep count must be positive");
    for (int i = 0; i < count; ++i)
      cfg.epsilons.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  }
  cfg.trials = j.value("trials", 50);
  cfg.split_ratio = j.value("split_ratio", 0.8);
  if (j.contains("trainer")) {
    const json& t = j.at("trainer");
    cfg.trainer.task = t.value("task", std::string("classification")) == "regression"
                           ? TaskKind::Regression
                           : TaskKind::Classification;
    cfg.trainer.epochs = t.value("epochs", cfg.trainer.task == TaskKind::Regression ? 200 : 30);
    cfg.trainer.batch_size = t.value("batch_size", cfg.trainer.task == TaskKind::Regression ? 100 : 128);
    cfg.trainer.model_lr = t.value("model_lr", cfg.trainer.task == TaskKind::Regression ? 1e-4 : 1e-3);
    cfg.trainer.dual_lr = t.value("dual_lr", 1e-2);
    cfg.trainer.lambda_init = t.value("lambda_init", cfg.trainer.task == TaskKind::Regression ? 5.0 : 10.0);
    cfg.trainer.weight_decay = t.value("weight_decay", cfg.trainer.task == TaskKind::Regression ? 0.01 : 0.0);
    cfg.trainer.hidden_width = t.value("hidden", cfg.trainer.task == TaskKind::Regression ? 50 : 80);
    cfg.trainer.subsample_k = t.value("subsample_k", 0LL);
    cfg.trainer.min_batch_members = t.value("min_batch_members", 8);
    if (t.contains("measure")) cfg.trainer.measure = measure_from_string(t.at("measure").get<std::string>());
    cfg.trainer.histogram.n_bins = t.value("n_bins", 10);
    cfg.trainer.histogram.bandwidth = t.value("bandwidth", 0.1);
    cfg.trainer.histogram.range_policy = t.value("range_policy", std::string("fixed_unit")) == "data_min_max"
                                             ? RangePolicy::DataMinMax
                                             : RangePolicy::FixedUnit;
  }
  cfg.moving_average = j.value("moving_average", 5);
  cfg.seed = j.value("seed", 1ULL);
  cfg.threads = j.value("threads", 0);
  cfg.fresh_data_per_trial = j.value("fresh_data_per_trial", true);
  cfg.validate();
  return cfg;
}

// ---------------- output ----------------

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExperimentError("cannot write " + path);
  out << content;
  if (!out) throw ExperimentError("write failed: " + path);
}

}  // namespace

std::vector<std::string> emit(const GaussianExperimentResult& result, const std::string& out_dir,
                              const std::string& prefix, OutputFormat format) {
  if (result.rows.empty()) throw ExperimentError("emit: no rows");
  std::vector<std::string> written;

  if (format == OutputFormat::Csv) {
    std::string rows;
    rows += "# gaussian experiment raw rows, one per (method, n_or_sigma, trial)\n";
    rows += "# violated = true_constraint_value > epsilon + 1e-9 (slack absorbs float rounding of boundary-binding optima)\n";
    rows += "method,n_or_sigma,trial,objective,mse,true_constraint_value,violated,epsilon,seed\n";
    for (const ResultRow& r : result.rows) {
      rows += r.method + "," + format_double(r.x) + "," + std::to_string(r.trial) + "," +
              format_double(r.objective) + "," + format_double(r.mse) + "," +
              format_double(r.true_constraint_value) + "," + (r.violated ? "1" : "0") + "," +
              format_double(r.epsilon) + "," + std::to_string(r.seed) + "\n";
    }
    const std::string rows_path = join_path(out_dir, prefix + "_rows.csv");
    write_file(rows_path, rows);
    written.push_back(rows_path);

    std::string summary;
    summary += "# per (method, n_or_sigma) aggregates over trials\n";
    summary += "method,n_or_sigma,trials,violation_fraction,mean_objective,mean_mse\n";
    for (const GaussianSummaryRow& s : result.summary) {
      summary += s.method + "," + format_double(s.x) + "," + std::to_string(s.trials) + "," +
                 format_double(s.violation_fraction) + "," + format_double(s.mean_objective) + "," +
                 format_double(s.mean_mse) + "\n";
    }
    const std::string summary_path = join_path(out_dir, prefix + "_summary.csv");
    write_file(summary_path, summary);
    written.push_back(summary_path);

    if (!result.histogram.empty()) {
      std::string hist;
      hist += "# binned counts of the true constraint value at the designated n\n";
      hist += "method,bin_lo,bin_hi,count\n";
      for (const HistogramRow& h : result.histogram)
        hist += h.method + "," + format_double(h.bin_lo) + "," + format_double(h.bin_hi) + "," +
                std::to_string(h.count) + "\n";
      const std::string hist_path = join_path(out_dir, prefix + "_histogram.csv");
      write_file(hist_path, hist);
      written.push_back(hist_path);
    }
    return written;
  }

  ordered_json out;
  out["rows"] = ordered_json::array();
  for (const ResultRow& r : result.rows) {
    ordered_json o;
    o["method"] = r.method;
    o["n_or_sigma"] = r.x;
    o["trial"] = r.trial;
    o["objective"] = r.objective;
    o["mse"] = r.mse;
    o["true_constraint_value"] = r.true_constraint_value;
    o["violated"] = r.violated;
    o["epsilon"] = r.epsilon;
    o["seed"] = r.seed;
    out["rows"].push_back(o);
  }
  out["summary"] = ordered_json::array();
  for (const GaussianSummaryRow& s : result.summary) {
    ordered_json o;
    o["method"] = s.method;
    o["n_or_sigma"] = s.x;
    o["trials"] = s.trials;
    o["violation_fraction"] = s.violation_fraction;
    o["mean_objective"] = s.mean_objective;
    o["mean_mse"] = s.mean_mse;
    out["summary"].push_back(o);
  }
  if (!result.histogram.empty()) {
    out["histogram"] = ordered_json::array();
    for (const HistogramRow& h : result.histogram) {
      ordered_json o;
      o["method"] = h.method;
      o["bin_lo"] = h.bin_lo;
      o["bin_hi"] = std::isinf(h.bin_hi) ? ordered_json() : ordered_json(h.bin_hi);
      o["count"] = h.count;
      out["histogram"].push_back(o);
    }
  }
  const std::string path = join_path(out_dir, prefix + ".json");
  write_file(path, out.dump(2) + "\n");
  written.push_back(path);
  return written;
}

std::vector<std::string> emit(const SweepResult& result, const std::string& out_dir,
                              const std::string& prefix, OutputFormat format) {
  if (result.rows.empty()) throw ExperimentError("emit: no rows");
  std::vector<std::string> written;

  // fairness metric columns: union over rows, sorted for a stable schema
  std::vector<std::string> metric_names;
  for (const SweepRow& r : result.rows)
    for (const auto& [k, v] : r.fairness)
      if (std::find(metric_names.begin(), metric_names.end(), k) == metric_names.end())
        metric_names.push_back(k);
  std::sort(metric_names.begin(), metric_names.end());

  if (format == OutputFormat::Csv) {
    std::string rows;
    rows += "# bootstrap sweep raw rows, one per (method, epsilon, trial)\n";
    rows += "method,epsilon,trial,error_or_mse";
    for (const std::string& m : metric_names) rows += "," + m;
    rows += "\n";
    for (const SweepRow& r : result.rows) {
      rows += r.method + "," + format_double(r.epsilon) + "," + std::to_string(r.trial) + "," +
              format_double(r.error_or_mse);
      for (const std::string& m : metric_names) {
        const auto it = r.fairness.find(m);
        rows += ",";
        rows += it == r.fairness.end() ? "" : format_double(it->second);
      }
      rows += "\n";
    }
    const std::string rows_path = join_path(out_dir, prefix + "_rows.csv");
    write_file(rows_path, rows);
    written.push_back(rows_path);

    std::string frontier;
    frontier += "# trade-off frontier: per (method, epsilon) means and centered 5-entry moving averages\n";
    frontier += "# primary fairness metric: " + result.primary_fairness_name + "\n";
    frontier += "method,epsilon,mean_error_or_mse,mean_fairness,ma_error_or_mse,ma_fairness\n";
    for (const FrontierRow& f : result.frontier) {
      frontier += f.method + "," + format_double(f.epsilon) + "," + format_double(f.mean_error_or_mse) +
                  "," + format_double(f.mean_primary_fairness) + "," + format_double(f.ma_error_or_mse) +
                  "," + format_double(f.ma_primary_fairness) + "\n";
    }
    const std::string frontier_path = join_path(out_dir, prefix + "_frontier.csv");
    write_file(frontier_path, frontier);
    written.push_back(frontier_path);
    return written;
  }

  ordered_json out;
  out["primary_fairness"] = result.primary_fairness_name;
  out["rows"] = ordered_json::array();
  for (const SweepRow& r : result.rows) {
    ordered_json o;
    o["method"] = r.method;
    o["epsilon"] = r.epsilon;
    o["trial"] = r.trial;
    o["error_or_mse"] = r.error_or_mse;
    for (const std::string& m : metric_names) {
      const auto it = r.fairness.find(m);
      if (it != r.fairness.end()) o[m] = it->second;
    }
    out["rows"].push_back(o);
  }
  out["frontier"] = ordered_json::array();
  for (const FrontierRow& f : result.frontier) {
    ordered_json o;
    o["method"] = f.method;
    o["epsilon"] = f.epsilon;
    o["mean_error_or_mse"] = f.mean_error_or_mse;
    o["mean_fairness"] = f.mean_primary_fairness;
    o["ma_error_or_mse"] = f.ma_error_or_mse;
    o["ma_fairness"] = f.ma_primary_fairness;
    out["frontier"].push_back(o);
  }
  const std::string path = join_path(out_dir, prefix + ".json");
  write_file(path, out.dump(2) + "\n");
  written.push_back(path);
  return written;
}

}  // namespace fairq
