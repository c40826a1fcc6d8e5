#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

namespace cqi {

/// One training step as seen by the metrics log.
struct StepRecord {
  std::uint64_t step = 0;
  std::uint64_t episode = 0;
  double reward = 0.0;
  std::size_t tree_size = 0;
  /// Current split threshold h_S (NaN for learners without one).
  double split_threshold = 0.0;
  double best_split_value = 0.0;
  bool split = false;
};

class MetricsLog {
 public:
  void add(const StepRecord& r) { rows_.push_back(r); }
  const std::vector<StepRecord>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  /// Header: step,episode,reward,tree_size,h_s,best_split_value,split
  void write_csv(std::ostream& out) const;

 private:
  std::vector<StepRecord> rows_;
};

}  // namespace cqi
