#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairq/experiment.hpp"

namespace {

using fairq::format_double;

std::vector<double> parse_vec(const std::string& s) {
  std::vector<double> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::stod(cur));
  return out;
}

nlohmann::ordered_json solution_json(const fairq::QcqpSolution& sol) {
  nlohmann::ordered_json o;
  o["a_star"] = sol.a_star;
  o["objective"] = sol.objective;
  o["constraint_value"] = sol.constraint_value;
  o["case"] = fairq::to_string(sol.case_label);
  o["alpha"] = sol.alpha;
  o["degenerate"] = sol.degenerate;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fair learning under uncertain sensitive attributes: solvers and experiment runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", format = "csv", prefix;
  long long seed_override = -1;
  int trials_override = -1, threads = 0;

  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--prefix", prefix, "output file prefix (default: experiment kind)");
    cmd->add_option("--seed", seed_override, "override the config seed");
    cmd->add_option("--trials", trials_override, "override the config trial count");
    cmd->add_option("--threads", threads, "worker threads (0: all cores; FAIRQ_THREADS overrides)");
  };

  CLI::App* gaussian = app.add_subcommand("gaussian", "run a Gaussian solver experiment");
  add_run_options(gaussian);

  CLI::App* sweep = app.add_subcommand("sweep", "run a training sweep over epsilon");
  add_run_options(sweep);

  CLI::App* solve_cmd = app.add_subcommand("solve", "one-shot QCQP / robust solve");
  std::string byx_s, bex_s, sector_s, mode = "plain";
  double epsilon = 0.05, tau = -1.0;
  int grid_n = 10000;
  solve_cmd->add_option("--byx", byx_s, "b_yx components, comma separated")->required();
  solve_cmd->add_option("--bex", bex_s, "b_ex (plain) or estimated b_ex (robust)")->required();
  solve_cmd->add_option("--epsilon", epsilon, "fairness budget")->required();
  solve_cmd->add_option("--mode", mode, "plain | robust3 | robustinf | oracle")
      ->check(CLI::IsMember({"plain", "robust3", "robustinf", "oracle"}));
  solve_cmd->add_option("--sector", sector_s, "r_hat,theta_hat,delta,phi (robust modes)");
  solve_cmd->add_option("--tau", tau, "ball radius; sector derived from --bex (robust modes)");
  solve_cmd->add_option("--grid-n", grid_n, "grid size for the oracle mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gaussian->parsed()) {
      fairq::GaussianExperimentConfig cfg;
      try {
        cfg = fairq::load_gaussian_config(config_path);
        if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
        if (trials_override > 0) cfg.trials = trials_override;
        if (threads > 0) cfg.threads = threads;
        cfg.validate();
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
      const auto result = fairq::run_gaussian_experiment(cfg);
      const std::string pfx = prefix.empty() ? (cfg.noise_experiment ? "gaussian_noise" : "gaussian_missing") : prefix;
      const auto files = fairq::emit(result, out_dir, pfx,
                                     format == "json" ? fairq::OutputFormat::Json : fairq::OutputFormat::Csv);
      for (const auto& f : files) std::cout << f << "\n";
      if (result.failed_trials > 0)
        std::cerr << "warning: " << result.failed_trials << " trials failed and were excluded\n";
      return 0;
    }

    if (sweep->parsed()) {
      fairq::SweepConfig cfg;
      try {
        cfg = fairq::load_sweep_config(config_path);
        if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
        if (trials_override > 0) cfg.trials = trials_override;
        if (threads > 0) cfg.threads = threads;
        cfg.validate();
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
      const auto result = fairq::run_bootstrap_sweep(cfg);
      const std::string pfx = prefix.empty() ? "sweep" : prefix;
      const auto files = fairq::emit(result, out_dir, pfx,
                                     format == "json" ? fairq::OutputFormat::Json : fairq::OutputFormat::Csv);
      for (const auto& f : files) std::cout << f << "\n";
      return 0;
    }

    // solve
    const std::vector<double> byx = parse_vec(byx_s);
    const std::vector<double> bex = parse_vec(bex_s);
    if (byx.size() != bex.size() || byx.empty()) {
      std::cerr << "config error: --byx and --bex must have the same nonzero length\n";
      return 2;
    }
    fairq::QcqpSolution sol;
    if (mode == "plain") {
      fairq::CcmVector vy{byx, "yx", false}, ve{bex, "ex", false};
      sol = fairq::solve(fairq::QcqpInstance{vy, ve, epsilon});
    } else if (mode == "oracle") {
      if (byx.size() != 2) {
        std::cerr << "config error: oracle mode needs d = 2\n";
        return 2;
      }
      fairq::CcmVector vy{byx, "yx", false}, ve{bex, "ex", false};
      sol = fairq::brute_force_oracle(fairq::QcqpInstance{vy, ve, epsilon}, grid_n);
    } else {
      if (byx.size() != 2) {
        std::cerr << "config error: robust modes need d = 2\n";
        return 2;
      }
      fairq::AnnularSector sector;
      if (!sector_s.empty()) {
        const std::vector<double> sv = parse_vec(sector_s);
        if (sv.size() != 4) {
          std::cerr << "config error: --sector needs r_hat,theta_hat,delta,phi\n";
          return 2;
        }
        sector = fairq::AnnularSector{sv[0], sv[1], sv[2], sv[3], false};
      } else if (tau >= 0.0) {
        sector = fairq::sector_from_ball(fairq::PolarVec::from_cartesian(bex[0], bex[1]), tau);
      } else {
        std::cerr << "config error: robust modes need --sector or --tau\n";
        return 2;
      }
      const fairq::PolarVec byx_p = fairq::PolarVec::from_cartesian(byx[0], byx[1]);
      sol = mode == "robust3" ? fairq::solve_robust_three(byx_p, sector, epsilon)
                              : fairq::solve_robust_infinite(byx_p, sector, epsilon);
    }
    std::cout << solution_json(sol).dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
