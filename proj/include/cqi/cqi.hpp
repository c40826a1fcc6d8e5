#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>

#include "cqi/environment.hpp"
#include "cqi/exploration.hpp"
#include "cqi/learner.hpp"
#include "cqi/policy_tree.hpp"

namespace cqi {

/// Hyperparameters of Conservative Q-Improvement.
struct CqiParams {
  double alpha = 0.01;
  double gamma = 0.8;
  /// H_S: split threshold right after a split (and at the start).
  double split_threshold_max = 10.0;
  /// D: per-step decay of the split threshold while no split happens.
  double split_threshold_decay = 0.9999;
  /// d: exponential-average factor for node visit frequencies.
  double visit_decay = 0.999;
  std::size_t num_splits = 3;
  double q_init = 0.0;
  EpsilonSchedule epsilon;

  void validate() const;
};

/// Bootstrapped value of the successor: max Q of the leaf holding
/// `next_state`, or 0 when the transition is terminal.
double next_state_value(const PolicyTree& tree, std::span<const double> next_state, bool terminal);

/// Q[a] <- (1 - alpha) Q[a] + alpha (reward + gamma next_value).
void update_leaf_q(LeafData& leaf, ActionId action, double reward, double next_value,
                   const CqiParams& params);

/// Every node on the root-to-leaf path moves toward 1; the sibling of each
/// non-root node on the path decays toward 0.
void update_visit_frequency(PolicyTree& tree, NodeId leaf, double visit_decay);

/// Shadow update of every candidate split. The side containing `state` gets
/// the Bellman value computed from the leaf's current Q[action] and moves its
/// visit frequency toward 1; the opposite side's visit frequency decays.
void update_possible_splits(LeafData& leaf, std::span<const double> state, ActionId action,
                            double reward, double next_value, const CqiParams& params);

struct SplitEvaluation {
  /// Ledger index of the best split; empty when the ledger is empty.
  std::optional<std::size_t> split;
  double value = -std::numeric_limits<double>::infinity();
};

/// Product of visit frequencies from the root down to `leaf`, inclusive.
double path_visit_product(const PolicyTree& tree, NodeId leaf);

/// Estimated policy-wide gain of each candidate split of `leaf`, measured
/// against Q[action] and weighted by the path visit product. Returns the
/// first maximiser in ledger order.
SplitEvaluation best_split(const PolicyTree& tree, NodeId leaf, ActionId action);

/// Runs the full learner for `budget` environment steps.
TrainResult train_cqi(Environment& env, const CqiParams& params, std::uint64_t budget, Rng& rng,
                      const TrainOptions& options = {});

}  // namespace cqi
