#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cqi/policy_tree.hpp"

namespace cqi {

/// Human-readable names for a tree's features and actions. Missing entries
/// fall back to "f{m}" and "a{k}".
struct TreeLabels {
  std::vector<std::string> feature_names;
  std::vector<std::string> action_names;

  std::string feature(std::size_t m) const;
  std::string action(ActionId a) const;
};

enum class TreeFormat { text, dot };

TreeFormat parse_tree_format(std::string_view name);

/// Indented if/else listing:
///
///     # feature 0 goal_distance 0 28.28
///     # action 0 toward_goal
///     if f0 < 2.5:  # goal_distance
///       action: toward_goal  # Q: [-1.0000, -2.5000]
///     else:
///       ...
///
/// Thresholds are written with round-trip precision so that a parsed tree
/// routes every state exactly like the original.
std::string export_text(const PolicyTree& tree, const TreeLabels& labels);

/// Graphviz digraph. Node ids follow pre-order; edges are labelled
/// true (condition holds, left) and false (right).
std::string export_dot(const PolicyTree& tree, const TreeLabels& labels);

std::string export_tree(const PolicyTree& tree, TreeFormat format, const TreeLabels& labels);

struct ParsedTree {
  PolicyTree tree;
  TreeLabels labels;
};

/// Reads the text format back. The named leaf action is authoritative: if the
/// rounded Q-values would pick another action, the named one is nudged up by
/// one ulp. Parsed leaves carry empty split ledgers. Throws ConfigError on
/// malformed input.
ParsedTree parse_text_tree(std::string_view text);

}  // namespace cqi
