#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cqi/metrics.hpp"
#include "cqi/policy_tree.hpp"

namespace cqi {

/// The tree as it stood immediately before the split performed at `step`.
struct Checkpoint {
  std::uint64_t step = 0;
  PolicyTree tree;
};

/// Read-only view handed to TrainOptions::on_step after every step.
struct StepView {
  const StepRecord& record;
  const PolicyTree& tree;
  NodeId visited_leaf;
};

struct TrainOptions {
  bool record_metrics = true;
  bool record_checkpoints = false;
  std::function<void(const StepView&)> on_step;
};

struct TrainResult {
  PolicyTree tree;
  MetricsLog metrics;
  std::vector<Checkpoint> checkpoints;
  std::uint64_t episodes = 0;
  std::uint64_t splits = 0;
};

}  // namespace cqi
