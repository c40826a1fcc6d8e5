#include "cqi/pyeatt.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "cqi/cqi.hpp"

namespace cqi::pyeatt {

void Params::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("method.alpha must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("method.gamma must be in [0, 1)");
  if (hist_min < 2) throw ConfigError("method.hist_min must be at least 2");
  if (num_splits < 1) throw ConfigError("method.num_splits must be at least 1");
  if (!(visit_decay > 0.0 && visit_decay < 1.0)) {
    throw ConfigError("method.visit_decay must be in (0, 1)");
  }
  if (!std::isfinite(q_init)) throw ConfigError("method.q_init must be finite");
  epsilon.validate();
}

void DeltaHistory::push(std::span<const double> state, double delta) {
  if (state.size() != dimension_) {
    throw ContractViolation("DeltaHistory: state dimension mismatch");
  }
  states_.insert(states_.end(), state.begin(), state.end());
  deltas_.push_back(delta);
  // Welford update keeps the variance exact for constant input.
  const double n = static_cast<double>(deltas_.size());
  const double diff = delta - mean_;
  mean_ += diff / n;
  m2_ += diff * (delta - mean_);
}

void DeltaHistory::clear() {
  states_.clear();
  deltas_.clear();
  mean_ = 0.0;
  m2_ = 0.0;
}

double DeltaHistory::stddev() const {
  if (deltas_.empty()) return 0.0;
  return std::sqrt(std::max(0.0, m2_ / static_cast<double>(deltas_.size())));
}

bool should_split(const DeltaHistory& history, std::size_t hist_min) {
  if (history.size() < hist_min) return false;
  return std::abs(history.mean()) < 2.0 * history.stddev();
}

std::optional<Cut> choose_split(const DeltaHistory& history, const Region& region,
                                std::size_t num_splits) {
  std::optional<Cut> best;
  double best_score = -1.0;
  std::optional<Cut> balanced;
  std::size_t best_imbalance = std::numeric_limits<std::size_t>::max();

  for (std::size_t m = 0; m < region.size(); ++m) {
    for (double u : candidate_thresholds(region[m], num_splits)) {
      double sum_left = 0.0;
      double sum_right = 0.0;
      std::size_t n_left = 0;
      for (std::size_t i = 0; i < history.size(); ++i) {
        if (history.state(i)[m] < u) {
          sum_left += history.delta(i);
          ++n_left;
        } else {
          sum_right += history.delta(i);
        }
      }
      const std::size_t n_right = history.size() - n_left;
      const std::size_t imbalance = n_left > n_right ? n_left - n_right : n_right - n_left;
      if (imbalance < best_imbalance) {
        best_imbalance = imbalance;
        balanced = Cut{m, u};
      }
      if (n_left == 0 || n_right == 0) continue;
      const double score = std::abs(sum_left / static_cast<double>(n_left) -
                                    sum_right / static_cast<double>(n_right));
      if (score > best_score) {
        best_score = score;
        best = Cut{m, u};
      }
    }
  }
  return best ? best : balanced;
}

TrainResult train(Environment& env, const Params& params, std::uint64_t budget, Rng& rng,
                  const TrainOptions& options) {
  params.validate();
  if (budget < 1) throw ContractViolation("pyeatt::train: budget must be at least 1");

  // Pyeatt leaves keep no shadow ledger.
  TrainResult result{PolicyTree(env.feature_bounds(), env.action_count(), 0, params.q_init),
                     {}, {}, 0, 0};
  PolicyTree& tree = result.tree;
  const std::size_t dim = env.feature_dimension();
  std::vector<DeltaHistory> histories(1, DeltaHistory(dim));
  const double nan = std::numeric_limits<double>::quiet_NaN();

  CqiParams bellman;
  bellman.alpha = params.alpha;
  bellman.gamma = params.gamma;

  StateVector state = env.reset(rng);
  for (std::uint64_t step = 0; step < budget; ++step) {
    const NodeId leaf = tree.traverse(state);
    LeafData& data = tree.node(leaf).leaf();
    const ActionId action = take_action(data.q, epsilon_at(step, params.epsilon), rng);
    Transition t = env.step(action, rng);

    const double before = data.q[action.value];
    update_leaf_q(data, action, t.reward, next_state_value(tree, t.next_state, t.terminal),
                  bellman);
    const double delta = data.q[action.value] - before;
    DeltaHistory& history = histories[leaf.value];
    history.push(state, delta);
    update_visit_frequency(tree, leaf, params.visit_decay);

    bool split = false;
    if (should_split(history, params.hist_min)) {
      if (auto cut = choose_split(history, tree.node(leaf).region, params.num_splits)) {
        if (options.record_checkpoints) result.checkpoints.push_back({step, tree});
        const std::vector<double> q = tree.node(leaf).leaf().q;
        tree.split_leaf(leaf, Split{cut->dimension, cut->threshold, {q, 0.5}, {q, 0.5}}, 0);
        histories.resize(tree.size(), DeltaHistory(dim));
        histories[leaf.value] = DeltaHistory(dim);
        split = true;
        ++result.splits;
      }
    }

    const StepRecord record{step, result.episodes, t.reward, tree.size(), nan, nan, split};
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

}  // namespace cqi::pyeatt
