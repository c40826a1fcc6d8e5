#pragma once

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cqi/environment.hpp"
#include "cqi/policy_tree.hpp"

namespace testing {

inline bool close_rel(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("cqi_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline cqi::Region unit_box(std::size_t dim, double low = 0.0, double high = 10.0) {
  return cqi::Region(dim, cqi::Interval{low, high});
}

inline cqi::StateVector random_state(const cqi::Region& region, cqi::Rng& rng) {
  cqi::StateVector s;
  for (const auto& iv : region) s.push_back(std::uniform_real_distribution<double>(iv.low, iv.high)(rng));
  return s;
}

/// Splits random leaves at random ledger entries until the tree has `splits` branches.
inline void grow_randomly(cqi::PolicyTree& tree, std::size_t splits, std::size_t num_splits,
                          cqi::Rng& rng) {
  for (std::size_t k = 0; k < splits; ++k) {
    auto leaves = tree.leaves();
    std::vector<cqi::NodeId> splittable;
    for (auto id : leaves) {
      if (!tree.node(id).leaf().splits.empty()) splittable.push_back(id);
    }
    if (splittable.empty()) return;
    const auto leaf = splittable[std::uniform_int_distribution<std::size_t>(
        0, splittable.size() - 1)(rng)];
    const auto n = tree.node(leaf).leaf().splits.size();
    tree.split_node(leaf, std::uniform_int_distribution<std::size_t>(0, n - 1)(rng), num_splits);
  }
}

/// Leaf whose half-open region holds `s`, found by scanning every leaf.
inline std::vector<cqi::NodeId> leaves_containing(const cqi::PolicyTree& tree,
                                                 const cqi::StateVector& s) {
  std::vector<cqi::NodeId> hits;
  for (auto id : tree.leaves()) {
    const auto& region = tree.node(id).region;
    bool inside = true;
    for (std::size_t m = 0; m < s.size(); ++m) {
      const bool upper_ok =
          s[m] < region[m].high || (s[m] == region[m].high && region[m].high == tree.bounds()[m].high);
      if (!(s[m] >= region[m].low && upper_ok)) inside = false;
    }
    if (inside) hits.push_back(id);
  }
  return hits;
}

/// Scripted environment for harness tests: fixed features, every step returns
/// `reward` and ends the episode after `episode_length` steps (0 = never).
class ScriptedEnv final : public cqi::Environment {
 public:
  ScriptedEnv(double reward, int episode_length, bool terminal = true)
      : reward_(reward), length_(episode_length), terminal_(terminal) {}

  std::size_t feature_dimension() const override { return 1; }
  const cqi::Region& feature_bounds() const override { return bounds_; }
  const std::vector<std::string>& feature_names() const override { return names_; }
  std::size_t action_count() const override { return 2; }
  const std::vector<std::string>& action_names() const override { return actions_; }
  cqi::StateVector reset(cqi::Rng&) override {
    t_ = 0;
    return observe();
  }
  cqi::Transition step(cqi::ActionId a, cqi::Rng&) override {
    ++t_;
    const bool done = length_ > 0 && t_ >= length_;
    return {observe(), a, reward_, observe(), done, done && terminal_};
  }
  cqi::StateVector observe() const override { return {0.5}; }

 private:
  double reward_;
  int length_;
  bool terminal_;
  int t_ = 0;
  cqi::Region bounds_{{0.0, 1.0}};
  std::vector<std::string> names_{"f"};
  std::vector<std::string> actions_{"a", "b"};
};

}  // namespace testing
