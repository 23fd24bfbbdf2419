// udn_assoc: run the association experiments and write CSV tables.
//
// Exit codes: 0 success, 1 configuration or I/O error, 2 non-convergence or divergence.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "udn/config.hpp"
#include "udn/mfg.hpp"
#include "udn/report.hpp"
#include "udn/sim.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;

// Thrown when the mean-field iteration runs out of iterations. Files are written first.
struct not_converged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> smooth;
};

void add_common_flags(CLI::App& cmd, Flags& flags) {
  cmd.add_option("--config", flags.config_path, "key = value configuration file");
  cmd.add_option("--out", flags.out, "output directory");
  cmd.add_option("--seed", flags.seed, "RNG seed (overrides seed and seeds)");
  cmd.add_option("--smooth", flags.smooth, "moving-average window for smoothed tables")->check(CLI::PositiveNumber);
}

udn::SimConfig load_config(const Flags& flags) {
  udn::SimConfig cfg = flags.config_path.empty() ? udn::SimConfig{} : udn::parse_config(flags.config_path);
  if (flags.out) cfg.output_dir = *flags.out;
  if (flags.seed) {
    cfg.seed = *flags.seed;
    cfg.seeds.reset();
  }
  if (flags.smooth) cfg.smooth_window = *flags.smooth;
  cfg.validate();
  return cfg;
}

std::string file_name(const std::string& stem, const std::string& suffix) { return stem + suffix + ".csv"; }

void run_two_phase(const udn::SimConfig& cfg, const std::string& suffix) {
  cfg.validate_two_phase();
  udn::Rng rng = udn::make_rng(cfg.seed);
  const udn::TwoPhaseResult result = udn::run_two_phase(cfg, rng);
  const fs::path dir = cfg.output_dir;
  udn::ensure_directory(dir);
  udn::metrics_table(result.slots).save(dir / file_name("metrics", suffix));
  udn::smoothed_table(result.slots, cfg.smooth_window).save(dir / file_name("metrics_smoothed", suffix));
  udn::loads_table(result.slots, cfg.sbs).save(dir / file_name("loads", suffix));
  udn::two_phase_summary(result, cfg.smooth_window).save(dir / file_name("summary", suffix));
}

void run_load_balance(const udn::SimConfig& cfg, const std::string& suffix) {
  cfg.validate_load_balance();
  udn::Rng rng = udn::make_rng(cfg.seed);
  const udn::LoadBalanceResult result = udn::run_load_balance_cases(cfg, rng);
  const fs::path dir = cfg.output_dir;
  auto write_run = [&](const fs::path& sub, std::span<const udn::SlotMetrics> slots) {
    udn::ensure_directory(sub);
    udn::metrics_table(slots).save(sub / file_name("metrics", suffix));
    udn::smoothed_table(slots, cfg.smooth_window).save(sub / file_name("metrics_smoothed", suffix));
    udn::loads_table(slots, cfg.sbs).save(sub / file_name("loads", suffix));
  };
  write_run(dir / "warmup", result.warmup);
  write_run(dir / "case1", result.cases[0].slots);
  write_run(dir / "case2", result.cases[1].slots);
  udn::balance_table(result).save(dir / file_name("balance", suffix));
  udn::balance_summary(result).save(dir / file_name("summary", suffix));
}

void run_mfg(const udn::SimConfig& cfg, const std::string& suffix) {
  cfg.validate_mfg();
  const auto topology = udn::make_scenario_topology(cfg);
  const udn::mfg::MfgModel model = udn::mfg::make_model(*topology, cfg.radio);
  udn::mfg::Vector pi0;
  if (cfg.mfg_pi0.empty()) {
    pi0 = udn::mfg::nearest_sbs_shares(*topology);
  } else {
    pi0 = Eigen::Map<const udn::mfg::Vector>(cfg.mfg_pi0.data(), static_cast<Eigen::Index>(cfg.mfg_pi0.size()));
    pi0 /= pi0.sum();
  }
  udn::mfg::SolveOptions options;
  options.horizon = cfg.mfg_horizon;
  options.max_iters = cfg.mfg_max_iters;
  options.damping = cfg.mfg_damping;
  options.tol = cfg.mfg_tol;
  const udn::mfg::MfgSolution solution = udn::mfg::solve_mfg(model, pi0, options);

  const fs::path dir = cfg.output_dir;
  udn::ensure_directory(dir);
  udn::trajectory_table(solution).save(dir / file_name("trajectory", suffix));
  udn::policy_table(solution).save(dir / file_name("policy", suffix));
  udn::mfg_summary(solution).save(dir / file_name("summary", suffix));
  if (!solution.converged)
    throw not_converged("mean-field iteration did not converge after " + std::to_string(solution.iterations) +
                        " iterations (residual " + udn::format_double(solution.residual) + ")");
}

using Runner = std::function<void(const udn::SimConfig&, const std::string&)>;

int report(const std::exception& e, int code) {
  std::cerr << "udn_assoc: " << e.what() << '\n';
  return code;
}

// Classifies one run's failure into an exit code.
int run_guarded(const Runner& run, const udn::SimConfig& cfg, const std::string& suffix) {
  try {
    run(cfg, suffix);
    return kExitOk;
  } catch (const udn::config_error& e) {
    return report(e, kExitConfig);
  } catch (const udn::io_error& e) {
    return report(e, kExitConfig);
  } catch (const udn::simulation_error& e) {
    std::cerr << "udn_assoc: slot " << e.slot() << ": " << e.what() << '\n';
    return kExitSolver;
  } catch (const not_converged& e) {
    return report(e, kExitSolver);
  } catch (const udn::divergence_error& e) {
    return report(e, kExitSolver);
  } catch (const std::invalid_argument& e) {
    return report(e, kExitConfig);
  }
}

int dispatch(const Runner& run, const udn::SimConfig& cfg) {
  if (!cfg.seeds) return run_guarded(run, cfg, "");

  // Independent seeds run concurrently; each writes its own seed-suffixed files.
  std::vector<std::future<int>> jobs;
  for (std::uint64_t s = cfg.seeds->first;; ++s) {
    udn::SimConfig one = cfg;
    one.seed = s;
    one.seeds.reset();
    jobs.push_back(std::async(std::launch::async, [run, one, s] {
      return run_guarded(run, one, "_seed" + std::to_string(s));
    }));
    if (s == cfg.seeds->last) break;
  }
  int worst = kExitOk;
  for (auto& job : jobs) worst = std::max(worst, job.get());
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"User-cell association in ultra-dense networks: mean-field solver and imitation learning experiments"};
  app.require_subcommand(1);

  Flags flags;
  Runner runner;
  auto* two_phase = app.add_subcommand("two-phase", "phase-1 learners, then imitator and non-imitator entrants");
  auto* balance = app.add_subcommand("load-balance", "warm-up, then branch on the entrants' cohort");
  auto* mfg_solve = app.add_subcommand("mfg-solve", "mean-field equilibrium on the SBS graph");
  for (auto* cmd : {two_phase, balance, mfg_solve}) add_common_flags(*cmd, flags);
  two_phase->callback([&] { runner = run_two_phase; });
  balance->callback([&] { runner = run_load_balance; });
  mfg_solve->callback([&] { runner = run_mfg; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; anything else is a usage error.
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  udn::SimConfig cfg;
  try {
    cfg = load_config(flags);
  } catch (const udn::config_error& e) {
    return report(e, kExitConfig);
  }
  return dispatch(runner, cfg);
}
