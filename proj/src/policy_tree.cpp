#include "cqi/policy_tree.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace cqi {

std::vector<double> candidate_thresholds(const Interval& interval, std::size_t num_splits) {
  std::vector<double> out;
  const double extent = interval.extent();
  if (!(extent > 0.0)) return out;
  out.reserve(num_splits);
  const double parts = static_cast<double>(num_splits + 1);
  for (std::size_t k = 1; k <= num_splits; ++k) {
    const double u = interval.low + extent * static_cast<double>(k) / parts;
    // Tiny extents can round onto a bound or collapse neighbouring points.
    if (u <= interval.low || u >= interval.high) continue;
    if (!out.empty() && u <= out.back()) continue;
    out.push_back(u);
  }
  return out;
}

std::vector<Split> init_split_ledger(const Region& region, std::size_t num_splits,
                                     std::span<const double> inherited_q) {
  std::vector<Split> ledger;
  ledger.reserve(region.size() * num_splits);
  const std::vector<double> q(inherited_q.begin(), inherited_q.end());
  for (std::size_t m = 0; m < region.size(); ++m) {
    for (double u : candidate_thresholds(region[m], num_splits)) {
      ledger.push_back(Split{m, u, SplitSide{q, 0.5}, SplitSide{q, 0.5}});
    }
  }
  return ledger;
}

ActionId best_action(std::span<const double> q) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < q.size(); ++a) {
    if (q[a] > q[best]) best = a;
  }
  return ActionId{best};
}

double max_q(std::span<const double> q) {
  double best = -std::numeric_limits<double>::infinity();
  for (double value : q) best = std::max(best, value);
  return best;
}

PolicyTree::PolicyTree(Region bounds, std::size_t action_count, std::size_t num_splits,
                       double q_init)
    : bounds_(std::move(bounds)), action_count_(action_count) {
  if (bounds_.empty()) throw ContractViolation("PolicyTree: feature space has no dimensions");
  if (action_count_ == 0) throw ContractViolation("PolicyTree: action set is empty");
  for (const Interval& b : bounds_) {
    if (!std::isfinite(b.low) || !std::isfinite(b.high) || !(b.low < b.high)) {
      throw ContractViolation(fmt::format("PolicyTree: invalid bounds [{}, {}]", b.low, b.high));
    }
  }
  std::vector<double> q(action_count_, q_init);
  Node root;
  root.visits = 1.0;
  root.region = bounds_;
  root.body = LeafData{q, init_split_ledger(bounds_, num_splits, q)};
  nodes_.push_back(std::move(root));
}

NodeId PolicyTree::traverse(std::span<const double> state) const {
  if (state.size() != bounds_.size()) {
    throw ContractViolation(fmt::format("traverse: state has {} features, tree expects {}",
                                        state.size(), bounds_.size()));
  }
  NodeId id = root();
  while (true) {
    const Node& n = nodes_[id.value];
    if (n.is_leaf()) return id;
    const BranchData& b = n.branch();
    id = state[b.dimension] < b.threshold ? b.left : b.right;
  }
}

ActionId PolicyTree::act(std::span<const double> state) const {
  return best_action(node(traverse(state)).leaf().q);
}

std::vector<NodeId> PolicyTree::path_to(NodeId id) const {
  std::vector<NodeId> path;
  std::optional<NodeId> cur = id;
  while (cur) {
    path.push_back(*cur);
    cur = node(*cur).parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::optional<NodeId> PolicyTree::sibling(NodeId id) const {
  const auto& parent = node(id).parent;
  if (!parent) return std::nullopt;
  const BranchData& b = node(*parent).branch();
  return b.left == id ? b.right : b.left;
}

std::vector<NodeId> PolicyTree::leaves() const {
  std::vector<NodeId> out;
  std::vector<NodeId> stack{root()};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    const Node& n = node(id);
    if (n.is_leaf()) {
      out.push_back(id);
    } else {
      stack.push_back(n.branch().right);
      stack.push_back(n.branch().left);
    }
  }
  return out;
}

NodeId PolicyTree::split_node(NodeId leaf, std::size_t ledger_index, std::size_t num_splits) {
  const Node& n = node(leaf);
  if (!n.is_leaf()) throw ContractViolation("split_node: target is not a leaf");
  const auto& ledger = n.leaf().splits;
  if (ledger_index >= ledger.size()) {
    throw ContractViolation(fmt::format("split_node: split {} not in ledger of size {}",
                                        ledger_index, ledger.size()));
  }
  Split chosen = ledger[ledger_index];
  return split_leaf(leaf, chosen, num_splits);
}

NodeId PolicyTree::split_leaf(NodeId leaf, const Split& chosen, std::size_t num_splits) {
  if (!node(leaf).is_leaf()) throw ContractViolation("split_leaf: target is not a leaf");
  if (chosen.dimension >= dimension()) {
    throw ContractViolation(fmt::format("split_leaf: dimension {} out of range", chosen.dimension));
  }
  const Interval span = node(leaf).region[chosen.dimension];
  if (!(chosen.threshold > span.low && chosen.threshold < span.high)) {
    throw ContractViolation(fmt::format("split_leaf: threshold {} outside ({}, {})",
                                        chosen.threshold, span.low, span.high));
  }
  for (const SplitSide* side : {&chosen.left, &chosen.right}) {
    if (side->q.size() != action_count_) {
      throw ContractViolation("split_leaf: split side has wrong number of Q-values");
    }
  }

  const std::size_t dim = chosen.dimension;
  const double threshold = chosen.threshold;
  const NodeId left{nodes_.size()};
  const NodeId right{nodes_.size() + 1};

  auto make_child = [&](const SplitSide& side, Region region) {
    Node child;
    child.visits = side.visits;
    child.parent = leaf;
    child.body = LeafData{side.q, init_split_ledger(region, num_splits, side.q)};
    child.region = std::move(region);
    return child;
  };

  Region left_region = node(leaf).region;
  left_region[dim].high = threshold;
  Region right_region = node(leaf).region;
  right_region[dim].low = threshold;

  Node left_child = make_child(chosen.left, std::move(left_region));
  Node right_child = make_child(chosen.right, std::move(right_region));

  // `chosen` may alias a ledger entry; push_back invalidates it.
  nodes_.push_back(std::move(left_child));
  nodes_.push_back(std::move(right_child));
  node(leaf).body = BranchData{dim, threshold, left, right};
  return leaf;
}

}  // namespace cqi
