#include "cqi/tree_io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>

namespace cqi {

std::string TreeLabels::feature(std::size_t m) const {
  if (m < feature_names.size() && !feature_names[m].empty()) return feature_names[m];
  return fmt::format("f{}", m);
}

std::string TreeLabels::action(ActionId a) const {
  if (a.value < action_names.size() && !action_names[a.value].empty()) {
    return action_names[a.value];
  }
  return fmt::format("a{}", a.value);
}

TreeFormat parse_tree_format(std::string_view name) {
  if (name == "text" || name == "txt") return TreeFormat::text;
  if (name == "dot") return TreeFormat::dot;
  throw ConfigError(fmt::format("unknown tree format '{}' (expected text or dot)", name));
}

namespace {

std::string q_list(std::span<const double> q) {
  std::string out = "[";
  for (std::size_t a = 0; a < q.size(); ++a) {
    if (a > 0) out += ", ";
    out += fmt::format("{:.4f}", q[a]);
  }
  out += "]";
  return out;
}

void write_text(const PolicyTree& tree, NodeId id, const TreeLabels& labels, int depth,
                std::string& out) {
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  const Node& n = tree.node(id);
  if (n.is_leaf()) {
    const auto& q = n.leaf().q;
    out += fmt::format("{}action: {}  # Q: {}\n", indent, labels.action(best_action(q)), q_list(q));
    return;
  }
  const BranchData& b = n.branch();
  out += fmt::format("{}if f{} < {}:", indent, b.dimension, b.threshold);
  if (const std::string name = labels.feature(b.dimension); name != fmt::format("f{}", b.dimension)) {
    out += fmt::format("  # {}", name);
  }
  out += "\n";
  write_text(tree, b.left, labels, depth + 1, out);
  out += fmt::format("{}else:\n", indent);
  write_text(tree, b.right, labels, depth + 1, out);
}

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string export_text(const PolicyTree& tree, const TreeLabels& labels) {
  std::string out;
  for (std::size_t m = 0; m < tree.dimension(); ++m) {
    out += fmt::format("# feature {} {} {} {}\n", m, labels.feature(m), tree.bounds()[m].low,
                       tree.bounds()[m].high);
  }
  for (std::size_t a = 0; a < tree.action_count(); ++a) {
    out += fmt::format("# action {} {}\n", a, labels.action(ActionId{a}));
  }
  write_text(tree, tree.root(), labels, 0, out);
  return out;
}

std::string export_dot(const PolicyTree& tree, const TreeLabels& labels) {
  std::string nodes;
  std::string edges;
  std::size_t next_id = 0;

  // Pre-order numbering; returns the DOT id of the subtree root.
  auto visit = [&](auto&& self, NodeId id) -> std::size_t {
    const std::size_t me = next_id++;
    const Node& n = tree.node(id);
    if (n.is_leaf()) {
      const auto& q = n.leaf().q;
      nodes += fmt::format("  n{} [shape=box, label=\"{}\\nQ: {}\"];\n", me,
                           dot_escape(labels.action(best_action(q))), q_list(q));
      return me;
    }
    const BranchData& b = n.branch();
    nodes += fmt::format("  n{} [shape=ellipse, label=\"f[{}] < {}\"];\n", me, b.dimension,
                         b.threshold);
    const std::size_t l = self(self, b.left);
    edges += fmt::format("  n{} -> n{} [label=\"true\"];\n", me, l);
    const std::size_t r = self(self, b.right);
    edges += fmt::format("  n{} -> n{} [label=\"false\"];\n", me, r);
    return me;
  };
  visit(visit, tree.root());
  return "digraph policy {\n" + nodes + edges + "}\n";
}

std::string export_tree(const PolicyTree& tree, TreeFormat format, const TreeLabels& labels) {
  return format == TreeFormat::dot ? export_dot(tree, labels) : export_text(tree, labels);
}

namespace {

struct Line {
  std::size_t number = 0;
  int depth = 0;
  std::string body;  // trimmed, comment kept
};

struct SyntaxNode {
  bool leaf = true;
  std::size_t dimension = 0;
  double threshold = 0.0;
  std::string action;
  std::vector<double> q;
  std::unique_ptr<SyntaxNode> left;
  std::unique_ptr<SyntaxNode> right;
};

[[noreturn]] void fail(std::size_t line, std::string_view what) {
  throw ConfigError(fmt::format("tree text line {}: {}", line, what));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view s, std::size_t line) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(line, fmt::format("expected a number, got '{}'", s));
  }
  return v;
}

std::size_t to_index(std::string_view s, std::size_t line) {
  s = trim(s);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(line, fmt::format("expected an index, got '{}'", s));
  }
  return v;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  while (!s.empty()) {
    auto end = s.find(' ');
    out.push_back(s.substr(0, end));
    if (end == std::string_view::npos) break;
    s = trim(s.substr(end));
  }
  return out;
}

class TextParser {
 public:
  explicit TextParser(std::vector<Line> lines) : lines_(std::move(lines)) {}

  std::unique_ptr<SyntaxNode> parse_root() {
    if (lines_.empty()) fail(0, "tree body is empty");
    auto root = parse_node(0);
    if (pos_ != lines_.size()) fail(lines_[pos_].number, "unexpected trailing content");
    return root;
  }

 private:
  std::unique_ptr<SyntaxNode> parse_node(int depth) {
    if (pos_ >= lines_.size()) fail(lines_.back().number, "unexpected end of tree");
    const Line& line = lines_[pos_++];
    if (line.depth != depth) fail(line.number, "bad indentation");
    std::string_view body = line.body;
    std::string_view comment;
    if (auto hash = body.find('#'); hash != std::string_view::npos) {
      comment = trim(body.substr(hash + 1));
      body = trim(body.substr(0, hash));
    }

    auto node = std::make_unique<SyntaxNode>();
    if (body.starts_with("action:")) {
      node->action = std::string(trim(body.substr(7)));
      if (node->action.empty()) fail(line.number, "leaf without action name");
      if (!comment.starts_with("Q:")) fail(line.number, "leaf without Q-value list");
      std::string_view list = trim(comment.substr(2));
      if (list.size() < 2 || list.front() != '[' || list.back() != ']') {
        fail(line.number, "malformed Q-value list");
      }
      list = list.substr(1, list.size() - 2);
      while (!trim(list).empty()) {
        auto comma = list.find(',');
        node->q.push_back(to_double(list.substr(0, comma), line.number));
        if (comma == std::string_view::npos) break;
        list = list.substr(comma + 1);
      }
      return node;
    }

    if (!body.starts_with("if f") || !body.ends_with(":")) {
      fail(line.number, fmt::format("expected 'if' or 'action:', got '{}'", line.body));
    }
    std::string_view cond = body.substr(4, body.size() - 5);
    auto lt = cond.find('<');
    if (lt == std::string_view::npos) fail(line.number, "condition without '<'");
    node->leaf = false;
    node->dimension = to_index(cond.substr(0, lt), line.number);
    node->threshold = to_double(cond.substr(lt + 1), line.number);
    node->left = parse_node(depth + 1);
    if (pos_ >= lines_.size() || lines_[pos_].depth != depth || lines_[pos_].body != "else:") {
      fail(line.number, "'if' without matching 'else:'");
    }
    ++pos_;
    node->right = parse_node(depth + 1);
    return node;
  }

  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

ActionId lookup_action(const TreeLabels& labels, const std::string& name, std::size_t count) {
  for (std::size_t a = 0; a < count; ++a) {
    if (labels.action(ActionId{a}) == name) return ActionId{a};
  }
  throw ConfigError(fmt::format("tree text: unknown action '{}'", name));
}

void build(PolicyTree& tree, NodeId id, const SyntaxNode& syntax, const TreeLabels& labels) {
  if (syntax.leaf) {
    if (syntax.q.size() != tree.action_count()) {
      throw ConfigError(fmt::format("tree text: leaf '{}' has {} Q-values, expected {}",
                                    syntax.action, syntax.q.size(), tree.action_count()));
    }
    std::vector<double> q = syntax.q;
    const ActionId named = lookup_action(labels, syntax.action, tree.action_count());
    if (best_action(q) != named) {
      q[named.value] = std::nextafter(max_q(q), std::numeric_limits<double>::infinity());
    }
    tree.node(id).leaf().q = std::move(q);
    return;
  }
  if (syntax.dimension >= tree.dimension()) {
    throw ConfigError(fmt::format("tree text: feature f{} out of range", syntax.dimension));
  }
  const Interval span = tree.node(id).region[syntax.dimension];
  if (!(syntax.threshold > span.low && syntax.threshold < span.high)) {
    throw ConfigError(fmt::format("tree text: threshold {} unreachable for f{}", syntax.threshold,
                                  syntax.dimension));
  }
  const std::vector<double> zeros(tree.action_count(), 0.0);
  tree.split_leaf(id, Split{syntax.dimension, syntax.threshold, {zeros, 0.5}, {zeros, 0.5}}, 0);
  const BranchData b = tree.node(id).branch();
  build(tree, b.left, *syntax.left, labels);
  build(tree, b.right, *syntax.right, labels);
}

}  // namespace

ParsedTree parse_text_tree(std::string_view text) {
  struct FeatureDecl {
    std::string name;
    Interval bounds;
  };
  std::vector<std::optional<FeatureDecl>> features;
  std::vector<std::optional<std::string>> actions;
  std::vector<Line> body;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string_view view = raw;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (trim(view).empty()) continue;
    std::size_t spaces = 0;
    while (spaces < view.size() && view[spaces] == ' ') ++spaces;
    std::string_view content = trim(view);
    if (content.front() == '#') {
      auto w = words(content.substr(1));
      if (w.size() == 5 && w[0] == "feature") {
        const std::size_t m = to_index(w[1], number);
        if (features.size() <= m) features.resize(m + 1);
        features[m] = FeatureDecl{std::string(w[2]),
                                  Interval{to_double(w[3], number), to_double(w[4], number)}};
      } else if (w.size() == 3 && w[0] == "action") {
        const std::size_t a = to_index(w[1], number);
        if (actions.size() <= a) actions.resize(a + 1);
        actions[a] = std::string(w[2]);
      }
      continue;
    }
    if (spaces % 2 != 0) fail(number, "indentation must be a multiple of two spaces");
    body.push_back(Line{number, static_cast<int>(spaces / 2), std::string(content)});
  }

  ParsedTree result{PolicyTree({Interval{0.0, 1.0}}, 1, 0), {}};
  Region bounds;
  for (std::size_t m = 0; m < features.size(); ++m) {
    if (!features[m]) throw ConfigError(fmt::format("tree text: feature {} not declared", m));
    bounds.push_back(features[m]->bounds);
    result.labels.feature_names.push_back(features[m]->name);
  }
  for (std::size_t a = 0; a < actions.size(); ++a) {
    if (!actions[a]) throw ConfigError(fmt::format("tree text: action {} not declared", a));
    result.labels.action_names.push_back(*actions[a]);
  }
  if (bounds.empty()) throw ConfigError("tree text: no '# feature' declarations");
  if (actions.empty()) throw ConfigError("tree text: no '# action' declarations");

  TextParser parser(std::move(body));
  auto syntax = parser.parse_root();
  try {
    result.tree = PolicyTree(std::move(bounds), actions.size(), 0);
  } catch (const ContractViolation& e) {
    throw ConfigError(fmt::format("tree text: {}", e.what()));
  }
  build(result.tree, result.tree.root(), *syntax, result.labels);
  return result;
}

}  // namespace cqi
