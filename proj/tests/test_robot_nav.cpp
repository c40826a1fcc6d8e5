#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cqi/robot_nav.hpp"
#include "support.hpp"

using namespace cqi;

namespace {

RobotNavConfig open_arena() {
  RobotNavConfig c;
  c.goal = {6.0, 2.0};
  c.obstacles.clear();
  c.start = {2.0, 2.0};
  return c;
}

Vec2 rotate(Vec2 v, double angle) {
  return {v.x * std::cos(angle) - v.y * std::sin(angle), v.x * std::sin(angle) + v.y * std::cos(angle)};
}

}  // namespace

TEST_SUITE("robot_nav") {

TEST_CASE("goal-relative moves from a pose left of the goal") {
  RobotNav env(open_arena());
  Rng rng(1);
  const std::vector<Vec2> expected{{3, 2}, {1, 2}, {2, 1}, {2, 3}};
  for (std::size_t a = 0; a < 4; ++a) {
    env.set_position({2.0, 2.0});
    const Transition t = env.step(ActionId{a}, rng);
    CHECK(env.position().x == doctest::Approx(expected[a].x));
    CHECK(env.position().y == doctest::Approx(expected[a].y));
    CHECK(t.reward == -1.0);
    CHECK_FALSE(t.done);
  }
  CHECK(env.action_names() == std::vector<std::string>{"toward_goal", "away_from_goal",
                                                       "right_of_goal", "left_of_goal"});
}

TEST_CASE("sidesteps are the toward move rotated by a quarter turn") {
  RobotNavConfig c = open_arena();
  c.goal = {10.0, 10.0};
  c.step_size = 0.7;
  RobotNav env(c);
  Rng rng(3);
  for (int k = 0; k < 2000; ++k) {
    const Vec2 p{std::uniform_real_distribution<double>(0, 20)(rng),
                 std::uniform_real_distribution<double>(0, 20)(rng)};
    env.set_position(p);
    const Vec2 toward = env.displacement(ActionId{0});
    const Vec2 away = env.displacement(ActionId{1});
    const Vec2 right = env.displacement(ActionId{2});
    const Vec2 left = env.displacement(ActionId{3});
    const Vec2 r_oracle = rotate(toward, -std::numbers::pi / 2);
    const Vec2 l_oracle = rotate(toward, std::numbers::pi / 2);
    CHECK(right.x == doctest::Approx(r_oracle.x));
    CHECK(right.y == doctest::Approx(r_oracle.y));
    CHECK(left.x == doctest::Approx(l_oracle.x));
    CHECK(left.y == doctest::Approx(l_oracle.y));
    CHECK(toward.x + away.x == doctest::Approx(0.0));
    CHECK(right.y + left.y == doctest::Approx(0.0));
    for (Vec2 d : {toward, away, right, left}) CHECK(std::hypot(d.x, d.y) == doctest::Approx(0.7));
  }
}

TEST_CASE("cardinal moves ignore the goal") {
  RobotNavConfig c = open_arena();
  c.action_set = ActionSet::cardinal;
  RobotNav env(c);
  env.set_position({5.0, 5.0});
  CHECK(env.displacement(ActionId{0}).x == 1.0);
  CHECK(env.displacement(ActionId{1}).x == -1.0);
  CHECK(env.displacement(ActionId{2}).y == -1.0);
  CHECK(env.displacement(ActionId{3}).y == 1.0);
  CHECK(env.action_names()[3] == "north");
}

TEST_CASE("moving into an obstacle is blocked and penalised") {
  RobotNavConfig c = open_arena();
  c.obstacles = {{3.0, 0.0, 4.0, 4.0}};
  RobotNav env(c);
  Rng rng(1);
  env.set_position({2.5, 2.0});
  const Transition t = env.step(ActionId{0}, rng);
  CHECK(env.position().x == 2.5);
  CHECK(env.position().y == 2.0);
  CHECK(t.reward == -5.0);
  // A move that would jump over a thin wall is blocked too.
  c.obstacles = {{2.4, 0.0, 2.6, 4.0}};
  RobotNav thin(c);
  thin.set_position({2.0, 2.0});
  thin.step(ActionId{0}, rng);
  CHECK(thin.position().x == 2.0);
}

TEST_CASE("arena walls block moves") {
  RobotNav env(open_arena());
  Rng rng(1);
  env.set_position({0.5, 2.0});
  const Transition t = env.step(ActionId{1}, rng);
  CHECK(env.position().x == 0.5);
  CHECK(t.reward == -5.0);
}

TEST_CASE("reaching the goal ends the episode as terminal") {
  RobotNavConfig c = open_arena();
  c.goal_reward = 7.0;
  RobotNav env(c);
  Rng rng(1);
  env.set_position({4.5, 2.0});
  const Transition t = env.step(ActionId{0}, rng);
  CHECK(t.done);
  CHECK(t.terminal);
  CHECK(t.reward == 6.0);
  CHECK(t.next_state[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(env.step(ActionId{0}, rng), ContractViolation);
}

TEST_CASE("the step budget ends an episode without a terminal flag") {
  RobotNavConfig c = open_arena();
  c.max_episode_steps = 3;
  RobotNav env(c);
  Rng rng(1);
  env.reset(rng);
  CHECK_FALSE(env.step(ActionId{1}, rng).done);
  CHECK_FALSE(env.step(ActionId{0}, rng).done);
  const Transition t = env.step(ActionId{1}, rng);
  CHECK(t.done);
  CHECK_FALSE(t.terminal);
}

TEST_CASE("invalid actions are contract violations") {
  RobotNav env(open_arena());
  Rng rng(1);
  env.reset(rng);
  CHECK_THROWS_AS(env.step(ActionId{4}, rng), ContractViolation);
}

TEST_CASE("fixed starts repeat and random starts avoid obstacles") {
  RobotNav fixed(RobotNavConfig{});
  Rng rng(9);
  const auto first = fixed.reset(rng);
  for (int k = 0; k < 10; ++k) CHECK(fixed.reset(rng) == first);

  RobotNavConfig c;
  c.start_rule = StartRule::uniform_random_free;
  RobotNav random(c);
  int bad = 0;
  for (int k = 0; k < 10000; ++k) {
    random.reset(rng);
    const Vec2 p = random.position();
    for (const Rect& r : c.obstacles) bad += r.contains(p) ? 1 : 0;
    if (std::hypot(p.x - c.goal.x, p.y - c.goal.y) <= c.goal_radius) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("random starts fail loudly when nothing is free") {
  RobotNavConfig c;
  c.width = c.height = 4.0;
  c.goal = {2.0, 2.0};
  c.goal_radius = 3.0;
  c.obstacles.clear();
  c.start_rule = StartRule::uniform_random_free;
  RobotNav env(c);
  Rng rng(1);
  CHECK_THROWS_AS(env.reset(rng), ConfigError);
}

TEST_CASE("default observation layout and bounds") {
  RobotNav env(RobotNavConfig{});
  Rng rng(1);
  const auto s = env.reset(rng);
  CHECK(s.size() == 5);
  CHECK(env.feature_names() == std::vector<std::string>{"goal_distance", "obstacle_angle",
                                                        "obstacle_distance", "x", "y"});
  CHECK(s[0] == doctest::Approx(13.0));
  CHECK(s[3] == 3.0);
  CHECK(s[4] == 10.0);
  // Nearest obstacle point is (8, 10), straight ahead on the goal line.
  CHECK(s[1] == doctest::Approx(0.0));
  CHECK(s[2] == doctest::Approx(5.0));
  env.set_position({16.0, 10.0});
  CHECK(env.observe()[0] == 0.0);
}

TEST_CASE("obstacle angle is signed: counter-clockwise from the goal line is positive") {
  RobotNavConfig c = open_arena();
  c.goal = {10.0, 2.0};
  c.obstacles = {{4.0, 3.0, 5.0, 4.0}};
  RobotNav env(c);
  env.set_position({4.5, 2.0});
  CHECK(env.observe()[1] == doctest::Approx(std::numbers::pi / 2));
  CHECK(env.observe()[2] == doctest::Approx(1.0));
  c.obstacles = {{4.0, 0.0, 5.0, 1.0}};
  RobotNav below(c);
  below.set_position({4.5, 2.0});
  CHECK(below.observe()[1] == doctest::Approx(-std::numbers::pi / 2));
}

TEST_CASE("without obstacles the distance clamps to its upper bound") {
  RobotNav env(open_arena());
  env.set_position({1.0, 1.0});
  const auto s = env.observe();
  CHECK(s[2] == env.feature_bounds()[2].high);
  CHECK(s[1] == doctest::Approx(std::numbers::pi));
}

TEST_CASE("features stay inside their declared bounds") {
  RobotNavConfig c;
  c.features = parse_features("goal_distance,obstacle_angle,obstacle_distance,x,y,goal_bearing");
  RobotNav env(c);
  Rng rng(4);
  int outside = 0;
  for (int k = 0; k < 100000; ++k) {
    const Vec2 p{std::uniform_real_distribution<double>(0, 20)(rng),
                 std::uniform_real_distribution<double>(0, 20)(rng)};
    if (!env.free(p)) continue;
    env.set_position(p);
    const auto s = env.observe();
    for (std::size_t m = 0; m < s.size(); ++m) {
      if (s[m] < env.feature_bounds()[m].low || s[m] > env.feature_bounds()[m].high) ++outside;
    }
  }
  CHECK(outside == 0);
}

TEST_CASE("random play keeps the robot free, rewards bounded and episodes short") {
  RobotNavConfig c;
  c.start_rule = StartRule::uniform_random_free;
  c.max_episode_steps = 60;
  RobotNav env(c);
  Rng rng(12);
  env.reset(rng);
  int length = 0;
  for (int k = 0; k < 20000; ++k) {
    const Transition t = env.step(ActionId{std::uniform_int_distribution<std::size_t>(0, 3)(rng)}, rng);
    ++length;
    REQUIRE(env.free(env.position()));
    CHECK(t.reward >= c.step_reward + c.collision_penalty);
    CHECK(t.reward <= c.step_reward + c.goal_reward);
    CHECK(length <= c.max_episode_steps);
    if (t.done) {
      env.reset(rng);
      length = 0;
    }
  }
}

TEST_CASE("same seed gives the same trajectory") {
  RobotNavConfig c;
  c.start_rule = StartRule::uniform_random_free;
  auto run = [&] {
    RobotNav env(c);
    Rng rng(77);
    std::vector<double> trace;
    env.reset(rng);
    Rng actions(5);
    for (int k = 0; k < 500; ++k) {
      const auto t = env.step(ActionId{actions() % 4}, rng);
      trace.push_back(env.position().x);
      trace.push_back(t.reward);
      if (t.done) env.reset(rng);
    }
    return trace;
  };
  CHECK(run() == run());
}

TEST_CASE("invalid configurations name the offending key") {
  RobotNavConfig c;
  c.step_size = 0.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("env.step_size"), ConfigError);
  c = RobotNavConfig{};
  c.goal = {9.0, 10.0};
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("env.goal"), ConfigError);
  c = RobotNavConfig{};
  c.start = {9.0, 10.0};
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("env.start"), ConfigError);
  c = RobotNavConfig{};
  c.max_episode_steps = 0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("env.max_episode_steps"), ConfigError);
}

TEST_CASE("obstacle and feature lists parse") {
  const auto rects = parse_obstacles("1,2,3,4; 5,6,7,8");
  REQUIRE(rects.size() == 2);
  CHECK(rects[1].x0 == 5.0);
  CHECK(rects[1].y1 == 8.0);
  CHECK(parse_obstacles(format_obstacles(rects)).size() == 2);
  CHECK(parse_obstacles("").empty());
  CHECK_THROWS_AS(parse_obstacles("1,2,3"), ConfigError);
  CHECK_THROWS_AS(parse_obstacles("1,2,3,x"), ConfigError);
  CHECK_THROWS_AS(parse_features("x,altitude"), ConfigError);
  CHECK(parse_action_set("cardinal") == ActionSet::cardinal);
  CHECK(parse_start_rule("uniform_random_free") == StartRule::uniform_random_free);
  CHECK_THROWS_AS(parse_start_rule("anywhere"), ConfigError);
}

TEST_CASE("character maps set arena, obstacles, start and goal") {
  const std::string map =
      "......\n"
      "..##..\n"
      "S.##.G\n";
  const RobotNavConfig c = apply_map(RobotNavConfig{}, map, 2.0);
  CHECK(c.width == 12.0);
  CHECK(c.height == 6.0);
  CHECK(c.start.x == 1.0);
  CHECK(c.start.y == 1.0);
  CHECK(c.goal.x == 11.0);
  CHECK(c.goal.y == 1.0);
  CHECK(c.start_rule == StartRule::fixed);
  REQUIRE(c.obstacles.size() == 2);
  CHECK(c.obstacles[0].x0 == 4.0);
  CHECK(c.obstacles[0].x1 == 8.0);
  CHECK(c.obstacles[0].y0 == 2.0);
  CHECK(c.obstacles[0].y1 == 4.0);
  RobotNav env(c);
  CHECK_FALSE(env.free({6.0, 3.0}));
  CHECK(env.free({6.0, 5.0}));

  CHECK_THROWS_AS(apply_map(RobotNavConfig{}, "...\n..\n", 1.0), ConfigError);
  CHECK_THROWS_AS(apply_map(RobotNavConfig{}, "S..\n...\n", 1.0), ConfigError);
  CHECK_THROWS_AS(apply_map(RobotNavConfig{}, "G.x\n", 1.0), ConfigError);
}

TEST_CASE("shipped map file parses into a valid arena") {
  const std::string text = testing::read_file(std::filesystem::path(CQI_SOURCE_DIR) / "configs/maps/two_walls.map");
  const RobotNavConfig c = apply_map(RobotNavConfig{}, text, 1.0);
  CHECK_NOTHROW(c.validate());
  CHECK(c.width == 20.0);
  CHECK(c.start.x == 2.5);
  CHECK(c.goal.x == 15.5);
}

}
