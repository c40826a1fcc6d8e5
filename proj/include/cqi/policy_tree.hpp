#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "cqi/types.hpp"

namespace cqi {

/// Shadow statistics for one would-be child of a candidate split.
struct SplitSide {
  std::vector<double> q;
  double visits = 0.5;
};

/// A hypothetical cut of a leaf at `threshold` along `dimension`.
/// States with s[dimension] < threshold fall on the left side.
struct Split {
  std::size_t dimension = 0;
  double threshold = 0.0;
  SplitSide left;
  SplitSide right;
};

struct LeafData {
  std::vector<double> q;
  std::vector<Split> splits;
};

struct BranchData {
  std::size_t dimension = 0;
  double threshold = 0.0;
  NodeId left;
  NodeId right;
};

struct Node {
  double visits = 0.0;
  std::optional<NodeId> parent;
  /// Sub-box of the feature bounds routed to this node.
  Region region;
  std::variant<LeafData, BranchData> body;

  bool is_leaf() const { return std::holds_alternative<LeafData>(body); }
  LeafData& leaf() { return std::get<LeafData>(body); }
  const LeafData& leaf() const { return std::get<LeafData>(body); }
  const BranchData& branch() const { return std::get<BranchData>(body); }
};

/// Interior thresholds at fractions k/(num_splits+1), k = 1..num_splits, of
/// the interval. Empty for degenerate intervals.
std::vector<double> candidate_thresholds(const Interval& interval, std::size_t num_splits);

/// Fresh candidate-split ledger for a leaf covering `region`. Every side starts
/// with a copy of `inherited_q` and visit frequency 0.5.
std::vector<Split> init_split_ledger(const Region& region, std::size_t num_splits,
                                     std::span<const double> inherited_q);

/// Argmax over Q with ties going to the lowest action index.
ActionId best_action(std::span<const double> q);
double max_q(std::span<const double> q);

/// Full binary decision tree over a bounded feature box. Leaves hold per-action
/// Q-values; branches route on `state[dimension] < threshold` (left) versus
/// `>=` (right). Nodes are never removed, so a NodeId stays valid for the
/// tree's lifetime; splitting converts a leaf into a branch in place.
class PolicyTree {
 public:
  PolicyTree(Region bounds, std::size_t action_count, std::size_t num_splits,
             double q_init = 0.0);

  std::size_t size() const { return nodes_.size(); }
  std::size_t dimension() const { return bounds_.size(); }
  std::size_t action_count() const { return action_count_; }
  const Region& bounds() const { return bounds_; }

  NodeId root() const { return NodeId{0}; }
  const Node& node(NodeId id) const { return nodes_.at(id.value); }
  Node& node(NodeId id) { return nodes_.at(id.value); }

  NodeId traverse(std::span<const double> state) const;
  ActionId act(std::span<const double> state) const;

  /// Nodes from the root down to `id`, both inclusive.
  std::vector<NodeId> path_to(NodeId id) const;
  std::optional<NodeId> sibling(NodeId id) const;
  /// Leaves in pre-order.
  std::vector<NodeId> leaves() const;

  /// Executes the ledger entry `ledger_index` of `leaf`. Children take the
  /// shadow Q-values and visit frequencies of the corresponding split sides.
  /// Returns the id of the new branch (which equals `leaf`).
  NodeId split_node(NodeId leaf, std::size_t ledger_index, std::size_t num_splits);

  /// Same as split_node for a split that need not come from the ledger.
  NodeId split_leaf(NodeId leaf, const Split& chosen, std::size_t num_splits);

 private:
  Region bounds_;
  std::size_t action_count_;
  std::vector<Node> nodes_;
};

}  // namespace cqi
