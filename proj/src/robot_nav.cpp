#include "cqi/robot_nav.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cqi {

Vec2 Rect::nearest(Vec2 p) const {
  return Vec2{std::clamp(p.x, x0, x1), std::clamp(p.y, y0, y1)};
}

bool Rect::intersects_segment(Vec2 a, Vec2 b) const {
  // Liang-Barsky clipping against the closed rectangle.
  double t0 = 0.0;
  double t1 = 1.0;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - x0, x1 - a.x, a.y - y0, y1 - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return false;
  }
  return true;
}

std::string_view to_string(ActionSet v) {
  return v == ActionSet::goal_relative ? "goal_relative" : "cardinal";
}

std::string_view to_string(StartRule v) {
  return v == StartRule::fixed ? "fixed" : "uniform_random_free";
}

std::string_view to_string(NavFeature v) {
  switch (v) {
    case NavFeature::goal_distance: return "goal_distance";
    case NavFeature::obstacle_angle: return "obstacle_angle";
    case NavFeature::obstacle_distance: return "obstacle_distance";
    case NavFeature::x: return "x";
    case NavFeature::y: return "y";
    case NavFeature::goal_bearing: return "goal_bearing";
  }
  return "?";
}

ActionSet parse_action_set(std::string_view s) {
  if (s == "goal_relative") return ActionSet::goal_relative;
  if (s == "cardinal") return ActionSet::cardinal;
  throw ConfigError(fmt::format("unknown action set '{}'", s));
}

StartRule parse_start_rule(std::string_view s) {
  if (s == "fixed") return StartRule::fixed;
  if (s == "uniform_random_free") return StartRule::uniform_random_free;
  throw ConfigError(fmt::format("unknown start rule '{}'", s));
}

namespace {

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '\t') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<NavFeature> parse_features(std::string_view csv) {
  std::vector<NavFeature> out;
  for (const std::string& name : split_on(csv, ',')) {
    bool found = false;
    for (auto f : {NavFeature::goal_distance, NavFeature::obstacle_angle,
                   NavFeature::obstacle_distance, NavFeature::x, NavFeature::y,
                   NavFeature::goal_bearing}) {
      if (name == to_string(f)) {
        out.push_back(f);
        found = true;
      }
    }
    if (!found) throw ConfigError(fmt::format("unknown RobotNav feature '{}'", name));
  }
  return out;
}

std::vector<Rect> parse_obstacles(std::string_view text) {
  std::vector<Rect> out;
  for (const std::string& item : split_on(text, ';')) {
    if (item.empty()) continue;
    auto parts = split_on(item, ',');
    if (parts.size() != 4) {
      throw ConfigError(fmt::format("obstacle '{}' must be x0,y0,x1,y1", item));
    }
    double v[4];
    for (int i = 0; i < 4; ++i) {
      try {
        std::size_t used = 0;
        v[i] = std::stod(parts[static_cast<std::size_t>(i)], &used);
        if (used != parts[static_cast<std::size_t>(i)].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ConfigError(fmt::format("obstacle '{}' has a non-numeric coordinate", item));
      }
    }
    out.push_back(Rect{v[0], v[1], v[2], v[3]});
  }
  return out;
}

std::string format_obstacles(const std::vector<Rect>& obstacles) {
  std::string out;
  for (const Rect& r : obstacles) {
    if (!out.empty()) out += ";";
    out += fmt::format("{},{},{},{}", r.x0, r.y0, r.x1, r.y1);
  }
  return out;
}

void RobotNavConfig::validate() const {
  auto require = [](bool ok, std::string_view key, std::string_view what) {
    if (!ok) throw ConfigError(fmt::format("env.{}: {}", key, what));
  };
  require(std::isfinite(width) && width > 0.0, "width", "must be positive");
  require(std::isfinite(height) && height > 0.0, "height", "must be positive");
  require(std::isfinite(step_size) && step_size > 0.0, "step_size", "must be positive");
  require(goal_radius > 0.0, "goal_radius", "must be positive");
  require(max_episode_steps >= 1, "max_episode_steps", "must be at least 1");
  require(obstacle_sense_range > 0.0, "obstacle_sense_range", "must be positive");
  require(!features.empty(), "features", "at least one feature is required");
  require(std::isfinite(step_reward) && std::isfinite(collision_penalty) &&
              std::isfinite(goal_reward),
          "step_reward", "rewards must be finite");
  auto inside = [&](Vec2 p) { return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height; };
  require(inside(goal), "goal_x", "goal must lie inside the arena");
  for (const Rect& r : obstacles) {
    require(r.x0 < r.x1 && r.y0 < r.y1, "obstacles", "each rectangle needs x0 < x1 and y0 < y1");
    require(!r.contains(goal), "goal_x", "goal lies inside an obstacle");
    if (start_rule == StartRule::fixed) {
      require(!r.contains(start), "start_x", "start lies inside an obstacle");
    }
  }
  if (start_rule == StartRule::fixed) {
    require(inside(start), "start_x", "start must lie inside the arena");
  }
}

RobotNavConfig apply_map(RobotNavConfig base, std::string_view map_text, double cell_size) {
  if (!(cell_size > 0.0)) throw ConfigError("map cell size must be positive");
  std::vector<std::string> rows;
  std::istringstream in{std::string(map_text)};
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) rows.push_back(line);
  }
  if (rows.empty()) throw ConfigError("map is empty");
  const std::size_t cols = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != cols) throw ConfigError("map rows must all have the same length");
  }

  base.width = static_cast<double>(cols) * cell_size;
  base.height = static_cast<double>(rows.size()) * cell_size;
  base.obstacles.clear();
  bool have_goal = false;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double y0 = static_cast<double>(rows.size() - 1 - r) * cell_size;
    const double y1 = y0 + cell_size;
    std::size_t c = 0;
    while (c < cols) {
      const char ch = rows[r][c];
      const double cx = (static_cast<double>(c) + 0.5) * cell_size;
      const double cy = y0 + 0.5 * cell_size;
      if (ch == '#') {
        std::size_t end = c;
        while (end < cols && rows[r][end] == '#') ++end;
        base.obstacles.push_back(Rect{static_cast<double>(c) * cell_size, y0,
                                      static_cast<double>(end) * cell_size, y1});
        c = end;
        continue;
      }
      if (ch == 'S') {
        base.start = Vec2{cx, cy};
        base.start_rule = StartRule::fixed;
      } else if (ch == 'G') {
        if (have_goal) throw ConfigError("map has more than one goal");
        base.goal = Vec2{cx, cy};
        have_goal = true;
      } else if (ch != '.') {
        throw ConfigError(fmt::format("map: unexpected character '{}'", ch));
      }
      ++c;
    }
  }
  if (!have_goal) throw ConfigError("map has no goal 'G'");
  return base;
}

RobotNav::RobotNav(RobotNavConfig config) : config_(std::move(config)) {
  config_.validate();
  const double diagonal = std::hypot(config_.width, config_.height);
  for (NavFeature f : config_.features) {
    feature_names_.emplace_back(to_string(f));
    switch (f) {
      case NavFeature::goal_distance: bounds_.push_back({0.0, diagonal}); break;
      case NavFeature::obstacle_angle:
      case NavFeature::goal_bearing: bounds_.push_back({-std::numbers::pi, std::numbers::pi}); break;
      case NavFeature::obstacle_distance:
        bounds_.push_back({0.0, config_.obstacle_sense_range});
        break;
      case NavFeature::x: bounds_.push_back({0.0, config_.width}); break;
      case NavFeature::y: bounds_.push_back({0.0, config_.height}); break;
    }
  }
  if (config_.action_set == ActionSet::goal_relative) {
    action_names_ = {"toward_goal", "away_from_goal", "right_of_goal", "left_of_goal"};
  } else {
    action_names_ = {"east", "west", "south", "north"};
  }
  position_ = config_.start;
}

bool RobotNav::free(Vec2 p) const {
  if (p.x < 0.0 || p.x > config_.width || p.y < 0.0 || p.y > config_.height) return false;
  return std::none_of(config_.obstacles.begin(), config_.obstacles.end(),
                      [&](const Rect& r) { return r.contains(p); });
}

StateVector RobotNav::reset(Rng& rng) {
  if (config_.start_rule == StartRule::fixed) {
    set_position(config_.start);
    return observe();
  }
  std::uniform_real_distribution<double> ux(0.0, config_.width);
  std::uniform_real_distribution<double> uy(0.0, config_.height);
  constexpr int kMaxAttempts = 100000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Vec2 p{ux(rng), uy(rng)};
    const double to_goal = std::hypot(config_.goal.x - p.x, config_.goal.y - p.y);
    if (free(p) && to_goal > config_.goal_radius) {
      set_position(p);
      return observe();
    }
  }
  throw ConfigError("RobotNav reset: no free start position found");
}

void RobotNav::set_position(Vec2 p) {
  position_ = p;
  steps_ = 0;
  done_ = false;
}

Vec2 RobotNav::displacement(ActionId action) const {
  const double s = config_.step_size;
  if (config_.action_set == ActionSet::cardinal) {
    switch (action.value) {
      case 0: return {s, 0.0};
      case 1: return {-s, 0.0};
      case 2: return {0.0, -s};
      case 3: return {0.0, s};
    }
  } else {
    double ux = config_.goal.x - position_.x;
    double uy = config_.goal.y - position_.y;
    const double norm = std::hypot(ux, uy);
    if (norm > 0.0) {
      ux /= norm;
      uy /= norm;
    } else {
      ux = 1.0;
      uy = 0.0;
    }
    switch (action.value) {
      case 0: return {s * ux, s * uy};
      case 1: return {-s * ux, -s * uy};
      case 2: return {s * uy, -s * ux};
      case 3: return {-s * uy, s * ux};
    }
  }
  throw ContractViolation(fmt::format("RobotNav: invalid action {}", action.value));
}

Transition RobotNav::step(ActionId action, Rng& /*rng*/) {
  if (done_) throw ContractViolation("RobotNav: step called on a finished episode");
  if (action.value >= action_count()) {
    throw ContractViolation(fmt::format("RobotNav: invalid action {}", action.value));
  }
  Transition t;
  t.state = observe();
  t.action = action;

  const Vec2 d = displacement(action);
  const Vec2 target{position_.x + d.x, position_.y + d.y};
  const bool blocked =
      !free(target) || std::any_of(config_.obstacles.begin(), config_.obstacles.end(),
                                   [&](const Rect& r) {
                                     return r.intersects_segment(position_, target);
                                   });
  t.reward = config_.step_reward;
  if (blocked) {
    t.reward += config_.collision_penalty;
  } else {
    position_ = target;
  }
  ++steps_;
  const double to_goal = std::hypot(config_.goal.x - position_.x, config_.goal.y - position_.y);
  if (to_goal <= config_.goal_radius) {
    t.reward += config_.goal_reward;
    t.terminal = true;
  }
  t.done = t.terminal || steps_ >= config_.max_episode_steps;
  done_ = t.done;
  t.next_state = observe();
  return t;
}

StateVector RobotNav::observe() const {
  const Vec2 p = position_;
  const double gx = config_.goal.x - p.x;
  const double gy = config_.goal.y - p.y;

  double obstacle_distance = config_.obstacle_sense_range;
  double obstacle_angle = std::numbers::pi;
  double nearest = std::numeric_limits<double>::infinity();
  for (const Rect& r : config_.obstacles) {
    const Vec2 n = r.nearest(p);
    const double dist = std::hypot(n.x - p.x, n.y - p.y);
    if (dist < nearest) {
      nearest = dist;
      // Signed angle from the goal direction to the obstacle direction.
      const double cross = gx * (n.y - p.y) - gy * (n.x - p.x);
      const double dot = gx * (n.x - p.x) + gy * (n.y - p.y);
      obstacle_angle = std::atan2(cross, dot);
    }
  }
  if (nearest < obstacle_distance) obstacle_distance = nearest;

  StateVector s;
  s.reserve(bounds_.size());
  for (std::size_t i = 0; i < config_.features.size(); ++i) {
    double value = 0.0;
    switch (config_.features[i]) {
      case NavFeature::goal_distance: value = std::hypot(gx, gy); break;
      case NavFeature::obstacle_angle: value = obstacle_angle; break;
      case NavFeature::obstacle_distance: value = obstacle_distance; break;
      case NavFeature::x: value = p.x; break;
      case NavFeature::y: value = p.y; break;
      case NavFeature::goal_bearing: value = std::atan2(gy, gx); break;
    }
    s.push_back(std::clamp(value, bounds_[i].low, bounds_[i].high));
  }
  return s;
}

}  // namespace cqi
