#pragma once

#include <cstdint>
#include <span>

#include "cqi/environment.hpp"

namespace cqi {

/// Linear epsilon decay from `start` to `end` over `decay_steps`, flat after.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  std::uint64_t decay_steps = 100000;

  void validate() const;
};

double epsilon_at(std::uint64_t step, const EpsilonSchedule& schedule);

/// Epsilon-greedy choice over a leaf's Q-values.
ActionId take_action(std::span<const double> q, double epsilon, Rng& rng);

}  // namespace cqi
