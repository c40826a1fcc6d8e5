#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cqi/environment.hpp"
#include "cqi/exploration.hpp"
#include "cqi/learner.hpp"
#include "cqi/policy_tree.hpp"

// Baseline that grows the tree from a per-leaf history of Q-value changes.
// The trigger and cut selection are reconstructions from a qualitative
// description: a leaf whose recent updates look like two distributions
// (mean change small relative to its spread) is split where the mean change
// differs most between the two sides.
namespace cqi::pyeatt {

struct Params {
  double alpha = 0.3;
  double gamma = 0.8;
  /// Minimum number of recorded updates before a leaf may split.
  std::size_t hist_min = 5000;
  /// Candidate thresholds per dimension, placed as for CQI.
  std::size_t num_splits = 3;
  double q_init = 0.0;
  double visit_decay = 0.999;
  EpsilonSchedule epsilon;

  void validate() const;
};

/// Per-leaf record of (state, delta Q) pairs with running mean and variance.
class DeltaHistory {
 public:
  explicit DeltaHistory(std::size_t dimension = 0) : dimension_(dimension) {}

  void push(std::span<const double> state, double delta);
  void clear();

  std::size_t size() const { return deltas_.size(); }
  std::size_t dimension() const { return dimension_; }
  double delta(std::size_t i) const { return deltas_[i]; }
  std::span<const double> state(std::size_t i) const {
    return {states_.data() + i * dimension_, dimension_};
  }

  double mean() const { return mean_; }
  /// Population standard deviation.
  double stddev() const;

 private:
  std::size_t dimension_;
  std::vector<double> states_;
  std::vector<double> deltas_;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// False below `hist_min`; otherwise true iff |mean| < 2 stddev.
bool should_split(const DeltaHistory& history, std::size_t hist_min);

struct Cut {
  std::size_t dimension = 0;
  double threshold = 0.0;
  bool operator==(const Cut&) const = default;
};

/// Best cut on the CQI candidate grid: maximises |mean delta left - mean delta
/// right|, first maximiser by dimension then threshold. If every candidate
/// leaves a side empty, the most balanced candidate wins. Empty when the
/// region has no candidate thresholds.
std::optional<Cut> choose_split(const DeltaHistory& history, const Region& region,
                                std::size_t num_splits);

TrainResult train(Environment& env, const Params& params, std::uint64_t budget, Rng& rng,
                  const TrainOptions& options = {});

}  // namespace cqi::pyeatt
