#include "cqi/cqi.hpp"

#include <fmt/format.h>

#include <cmath>

namespace cqi {

void CqiParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("method.alpha must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("method.gamma must be in [0, 1)");
  if (!(split_threshold_max > 0.0)) {
    throw ConfigError("method.split_thresh_max must be positive");
  }
  if (!(split_threshold_decay > 0.0 && split_threshold_decay <= 1.0)) {
    throw ConfigError("method.split_thresh_decay must be in (0, 1]");
  }
  if (!(visit_decay > 0.0 && visit_decay < 1.0)) {
    throw ConfigError("method.visit_decay must be in (0, 1)");
  }
  if (num_splits < 1) throw ConfigError("method.num_splits must be at least 1");
  if (!std::isfinite(q_init)) throw ConfigError("method.q_init must be finite");
  epsilon.validate();
}

double next_state_value(const PolicyTree& tree, std::span<const double> next_state, bool terminal) {
  if (terminal) return 0.0;
  return max_q(tree.node(tree.traverse(next_state)).leaf().q);
}

void update_leaf_q(LeafData& leaf, ActionId action, double reward, double next_value,
                   const CqiParams& params) {
  if (!std::isfinite(reward)) throw ContractViolation("update_leaf_q: reward is not finite");
  if (action.value >= leaf.q.size()) {
    throw ContractViolation(fmt::format("update_leaf_q: invalid action {}", action.value));
  }
  double& q = leaf.q[action.value];
  q = (1.0 - params.alpha) * q + params.alpha * (reward + params.gamma * next_value);
}

void update_visit_frequency(PolicyTree& tree, NodeId leaf, double visit_decay) {
  for (NodeId id : tree.path_to(leaf)) {
    Node& n = tree.node(id);
    n.visits = n.visits * visit_decay + (1.0 - visit_decay);
    if (auto sib = tree.sibling(id)) tree.node(*sib).visits *= visit_decay;
  }
}

void update_possible_splits(LeafData& leaf, std::span<const double> state, ActionId action,
                            double reward, double next_value, const CqiParams& params) {
  if (action.value >= leaf.q.size()) {
    throw ContractViolation(fmt::format("update_possible_splits: invalid action {}", action.value));
  }
  const double d = params.visit_decay;
  const double value = (1.0 - params.alpha) * leaf.q[action.value] +
                       params.alpha * (reward + params.gamma * next_value);
  for (Split& split : leaf.splits) {
    const bool left = state[split.dimension] < split.threshold;
    SplitSide& side = left ? split.left : split.right;
    SplitSide& other = left ? split.right : split.left;
    side.q[action.value] = value;
    side.visits = side.visits * d + (1.0 - d);
    other.visits = other.visits * d;
  }
}

double path_visit_product(const PolicyTree& tree, NodeId leaf) {
  double product = 1.0;
  for (NodeId id : tree.path_to(leaf)) product *= tree.node(id).visits;
  return product;
}

SplitEvaluation best_split(const PolicyTree& tree, NodeId leaf, ActionId action) {
  const LeafData& data = tree.node(leaf).leaf();
  SplitEvaluation best;
  if (data.splits.empty()) return best;
  const double weight = path_visit_product(tree, leaf);
  const double baseline = data.q.at(action.value);
  for (std::size_t i = 0; i < data.splits.size(); ++i) {
    const Split& s = data.splits[i];
    const double gain_left = max_q(s.left.q) - baseline;
    const double gain_right = max_q(s.right.q) - baseline;
    const double value = weight * (gain_left * s.left.visits + gain_right * s.right.visits);
    if (!best.split || value > best.value) {
      best.split = i;
      best.value = value;
    }
  }
  return best;
}

TrainResult train_cqi(Environment& env, const CqiParams& params, std::uint64_t budget, Rng& rng,
                      const TrainOptions& options) {
  params.validate();
  if (budget < 1) throw ContractViolation("train_cqi: budget must be at least 1");

  TrainResult result{PolicyTree(env.feature_bounds(), env.action_count(), params.num_splits,
                                params.q_init),
                     {}, {}, 0, 0};
  PolicyTree& tree = result.tree;
  double threshold = params.split_threshold_max;
  StateVector state = env.reset(rng);

  for (std::uint64_t step = 0; step < budget; ++step) {
    const NodeId leaf = tree.traverse(state);
    const ActionId action =
        take_action(tree.node(leaf).leaf().q, epsilon_at(step, params.epsilon), rng);
    Transition t = env.step(action, rng);

    update_leaf_q(tree.node(leaf).leaf(), action, t.reward,
                  next_state_value(tree, t.next_state, t.terminal), params);
    update_visit_frequency(tree, leaf, params.visit_decay);
    // Re-read: the successor may share this leaf, whose Q just changed.
    update_possible_splits(tree.node(leaf).leaf(), state, action, t.reward,
                           next_state_value(tree, t.next_state, t.terminal), params);
    const SplitEvaluation eval = best_split(tree, leaf, action);

    const bool split = eval.split && eval.value > threshold;
    if (split) {
      if (options.record_checkpoints) result.checkpoints.push_back({step, tree});
      tree.split_node(leaf, *eval.split, params.num_splits);
      threshold = params.split_threshold_max;
      ++result.splits;
    } else {
      threshold *= params.split_threshold_decay;
    }

    const StepRecord record{step,        result.episodes, t.reward, tree.size(),
                            threshold,   eval.value,      split};
    if (options.record_metrics) result.metrics.add(record);
    if (options.on_step) options.on_step(StepView{record, tree, leaf});

    if (t.done) {
      ++result.episodes;
      state = env.reset(rng);
    } else {
      state = std::move(t.next_state);
    }
  }
  return result;
}

}  // namespace cqi
