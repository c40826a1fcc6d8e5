#pragma once

#include <random>
#include <string>
#include <vector>

#include "cqi/types.hpp"

namespace cqi {

/// Random source shared by learners, environments and the harness.
using Rng = std::mt19937_64;

struct Transition {
  StateVector state;
  ActionId action;
  double reward = 0.0;
  StateVector next_state;
  /// Episode is over (goal reached or step budget exhausted).
  bool done = false;
  /// Episode ended in a true terminal state; bootstrapping stops here.
  /// A timeout sets `done` without `terminal`.
  bool terminal = false;
};

/// Episodic task with a bounded real-valued feature space and discrete actions.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t feature_dimension() const = 0;
  virtual const Region& feature_bounds() const = 0;
  virtual const std::vector<std::string>& feature_names() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual const std::vector<std::string>& action_names() const = 0;

  virtual StateVector reset(Rng& rng) = 0;
  virtual Transition step(ActionId action, Rng& rng) = 0;
  virtual StateVector observe() const = 0;
};

}  // namespace cqi
