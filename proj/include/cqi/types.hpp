#pragma once

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqi {

/// Raised when a caller breaks a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised for invalid user-supplied configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index of one discrete action.
struct ActionId {
  std::size_t value = 0;
  auto operator<=>(const ActionId&) const = default;
};

/// Index of a node inside a PolicyTree's node arena.
struct NodeId {
  std::size_t value = 0;
  auto operator<=>(const NodeId&) const = default;
};

/// Closed interval [low, high] along one feature dimension.
struct Interval {
  double low = 0.0;
  double high = 0.0;

  double extent() const { return high - low; }
  bool operator==(const Interval&) const = default;
};

/// Axis-aligned box in feature space.
using Region = std::vector<Interval>;

/// Observation in environment units. Length equals the feature dimension.
using StateVector = std::vector<double>;

}  // namespace cqi
