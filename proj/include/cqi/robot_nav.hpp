#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cqi/environment.hpp"

namespace cqi {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Closed axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  Vec2 nearest(Vec2 p) const;
  bool intersects_segment(Vec2 a, Vec2 b) const;
};

enum class ActionSet { goal_relative, cardinal };
enum class StartRule { fixed, uniform_random_free };

enum class NavFeature {
  goal_distance,
  obstacle_angle,
  obstacle_distance,
  x,
  y,
  goal_bearing,
};

std::string_view to_string(ActionSet v);
std::string_view to_string(StartRule v);
std::string_view to_string(NavFeature v);
ActionSet parse_action_set(std::string_view s);
StartRule parse_start_rule(std::string_view s);
std::vector<NavFeature> parse_features(std::string_view csv);
std::vector<Rect> parse_obstacles(std::string_view text);
std::string format_obstacles(const std::vector<Rect>& obstacles);

struct RobotNavConfig {
  double width = 20.0;
  double height = 20.0;
  Vec2 goal{16.0, 10.0};
  double goal_radius = 1.0;
  std::vector<Rect> obstacles{{8.0, 6.0, 10.0, 14.0}, {12.0, 12.0, 14.0, 17.0}};
  double step_size = 1.0;
  int max_episode_steps = 200;
  ActionSet action_set = ActionSet::goal_relative;
  double step_reward = -1.0;
  double collision_penalty = -4.0;
  double goal_reward = 0.0;
  StartRule start_rule = StartRule::fixed;
  Vec2 start{3.0, 10.0};
  /// Obstacle distances saturate here; also the feature's upper bound.
  double obstacle_sense_range = 5.0;
  std::vector<NavFeature> features{NavFeature::goal_distance, NavFeature::obstacle_angle,
                                   NavFeature::obstacle_distance, NavFeature::x, NavFeature::y};

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Applies a character map (rows of '.', '#', 'S', 'G'; first row is the top
/// of the arena) to `base`: arena size, obstacles, goal and, if an 'S' is
/// present, a fixed start. Each character is a `cell_size` square.
RobotNavConfig apply_map(RobotNavConfig base, std::string_view map_text, double cell_size = 1.0);

/// 2D navigation: a point robot moves toward a goal disc around rectangular
/// obstacles. Moves that would leave the arena or touch an obstacle are
/// blocked and penalised.
class RobotNav final : public Environment {
 public:
  explicit RobotNav(RobotNavConfig config);

  std::size_t feature_dimension() const override { return bounds_.size(); }
  const Region& feature_bounds() const override { return bounds_; }
  const std::vector<std::string>& feature_names() const override { return feature_names_; }
  std::size_t action_count() const override { return 4; }
  const std::vector<std::string>& action_names() const override { return action_names_; }

  StateVector reset(Rng& rng) override;
  Transition step(ActionId action, Rng& rng) override;
  StateVector observe() const override;

  const RobotNavConfig& config() const { return config_; }
  Vec2 position() const { return position_; }
  /// Places the robot directly and starts a fresh episode there.
  void set_position(Vec2 p);
  bool free(Vec2 p) const;
  /// Displacement produced by `action` from the current pose, before blocking.
  Vec2 displacement(ActionId action) const;

 private:
  RobotNavConfig config_;
  Region bounds_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> action_names_;
  Vec2 position_;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace cqi
