#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cqi/config.hpp"
#include "cqi/environment.hpp"
#include "cqi/learner.hpp"
#include "cqi/policy_tree.hpp"

namespace cqi {

struct EvalOutcome {
  /// Total reward over completed episodes divided by their count; empty when
  /// no episode finished within the step budget.
  std::optional<double> average;
  std::uint64_t episodes = 0;
  double total_reward = 0.0;
};

/// Runs the greedy policy for `eval_steps` steps. The trailing unfinished
/// episode is dropped.
EvalOutcome evaluate_policy(const PolicyTree& tree, Environment& env, std::uint64_t eval_steps,
                            Rng& rng);

struct CurvePoint {
  std::size_t tree_size = 0;
  std::optional<double> reward;
  /// Step of the split that ended this tree's life; training budget for the final tree.
  std::uint64_t step = 0;
};

/// Evaluates every pre-split checkpoint and then the final tree. Each
/// evaluation starts from a fresh generator seeded with `eval_seed`.
std::vector<CurvePoint> size_reward_curve(const std::vector<Checkpoint>& checkpoints,
                                          const PolicyTree& final_tree,
                                          std::uint64_t train_steps, Environment& env,
                                          std::uint64_t eval_steps, std::uint64_t eval_seed);

/// Generator seed for the evaluation phase of a trial.
std::uint64_t eval_seed_for(std::uint64_t trial_seed);

struct TrialResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  /// Non-empty when the trial aborted; the remaining fields are then unset.
  std::string error;
  std::size_t tree_size = 0;
  std::uint64_t splits = 0;
  std::uint64_t train_episodes = 0;
  EvalOutcome eval;
  /// Evaluation reward above the configured success threshold.
  bool successful = false;
  std::vector<CurvePoint> curve;

  bool failed() const { return !error.empty(); }
};

struct Aggregate {
  std::size_t trials = 0;
  std::size_t failed = 0;
  /// Trials with a numeric evaluation reward.
  std::size_t evaluated = 0;
  std::size_t successful = 0;
  double mean_size = 0.0;
  double std_size = 0.0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
};

/// Sample standard deviations over surviving trials (0 for a single trial).
Aggregate aggregate(const std::vector<TrialResult>& trials);

struct ExperimentResult {
  std::vector<TrialResult> trials;
  Aggregate summary;
};

/// Trains and evaluates one trial. Writes its files under `trial_dir` when
/// that is non-empty.
TrialResult run_trial(const ExperimentConfig& config, std::size_t index,
                      const std::filesystem::path& trial_dir);

/// Runs every trial and, when an output directory is configured, writes
/// config.snapshot, summary.csv, aggregate.csv and one trial_NN directory
/// per trial. `snapshot` is echoed verbatim into config.snapshot.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& snapshot = {});

void write_summary_csv(std::ostream& out, const std::vector<TrialResult>& trials);
void write_aggregate_csv(std::ostream& out, Method method, const Aggregate& summary);

struct SweepRow {
  std::vector<std::pair<std::string, std::string>> params;
  Aggregate summary;
};

/// Environment steps a sweep would take, curve evaluations excluded.
std::uint64_t estimate_sweep_steps(const Config& base);

/// Runs one experiment per point of the [grid] cross-product, first key
/// varying slowest. Refuses with ConfigError before starting when the
/// estimate exceeds sweep.max_total_steps. With an output directory each
/// point gets its own point_NN run directory and sweep.csv is written at the
/// top.
std::vector<SweepRow> run_sweep(const Config& base);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace cqi
