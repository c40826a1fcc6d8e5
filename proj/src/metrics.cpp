#include "cqi/metrics.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace cqi {

void MetricsLog::write_csv(std::ostream& out) const {
  out << "step,episode,reward,tree_size,h_s,best_split_value,split\n";
  fmt::memory_buffer buf;
  for (const StepRecord& r : rows_) {
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{},{}\n", r.step, r.episode, r.reward,
                   r.tree_size, r.split_threshold, r.best_split_value, r.split ? 1 : 0);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

}  // namespace cqi
