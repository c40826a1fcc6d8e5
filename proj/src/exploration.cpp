#include "cqi/exploration.hpp"

#include "cqi/policy_tree.hpp"

namespace cqi {

void EpsilonSchedule::validate() const {
  if (!(start >= 0.0 && start <= 1.0)) throw ConfigError("method.epsilon_start must be in [0, 1]");
  if (!(end >= 0.0 && end <= 1.0)) throw ConfigError("method.epsilon_end must be in [0, 1]");
  if (decay_steps < 1) throw ConfigError("method.epsilon_decay_steps must be at least 1");
}

double epsilon_at(std::uint64_t step, const EpsilonSchedule& schedule) {
  if (step >= schedule.decay_steps) return schedule.end;
  const double frac = static_cast<double>(step) / static_cast<double>(schedule.decay_steps);
  return schedule.start + (schedule.end - schedule.start) * frac;
}

ActionId take_action(std::span<const double> q, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ContractViolation("take_action: epsilon must be in [0, 1]");
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, q.size() - 1);
    return ActionId{pick(rng)};
  }
  return best_action(q);
}

}  // namespace cqi
