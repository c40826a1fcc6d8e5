#include "cqi/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

namespace cqi {

std::string_view to_string(Method m) { return m == Method::cqi ? "cqi" : "pyeatt"; }

std::string_view to_string(ValueSource s) {
  switch (s) {
    case ValueSource::default_value: return "default";
    case ValueSource::file: return "file";
    case ValueSource::override_value: return "override";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (train_steps < 1) throw ConfigError("harness.train_steps must be at least 1");
  if (eval_steps < 1) throw ConfigError("harness.eval_steps must be at least 1");
  if (trials < 1) throw ConfigError("harness.trials must be at least 1");
  if (seeds.size() != trials) {
    throw ConfigError(fmt::format("harness.seeds lists {} seeds for {} trials", seeds.size(),
                                  trials));
  }
  if (threads < 1) throw ConfigError("harness.threads must be at least 1");
  if (method == Method::cqi) {
    cqi.validate();
  } else {
    pyeatt.validate();
  }
  env.validate();
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"method.name", "cqi", "learner: cqi or pyeatt"},
      {"method.alpha", "0.01", "learning rate, (0, 1]"},
      {"method.gamma", "0.8", "discount factor, [0, 1)"},
      {"method.split_thresh_max", "10", "CQI: split threshold after each split (H_S)"},
      {"method.split_thresh_decay", "0.9999", "CQI: per-step threshold decay (D)"},
      {"method.visit_decay", "0.999", "visit-frequency decay (d)"},
      {"method.num_splits", "3", "candidate thresholds per dimension"},
      {"method.q_init", "0", "initial Q-value of the root leaf"},
      {"method.hist_min", "5000", "Pyeatt: minimum delta-Q history before a split"},
      {"method.epsilon_start", "1", "exploration rate at step 0"},
      {"method.epsilon_end", "0.05", "exploration floor"},
      {"method.epsilon_decay_steps", "100000", "steps of linear epsilon decay"},
      {"env.map_file", "", "optional character map ('.', '#', 'S', 'G'); relative to the config"},
      {"env.map_cell_size", "1", "side length of one map character"},
      {"env.width", "20", "arena width"},
      {"env.height", "20", "arena height"},
      {"env.goal_x", "16", "goal centre x"},
      {"env.goal_y", "10", "goal centre y"},
      {"env.goal_radius", "1", "goal disc radius"},
      {"env.obstacles", "8,6,10,14;12,12,14,17", "rectangles x0,y0,x1,y1 separated by ';'"},
      {"env.step_size", "1", "distance moved per action"},
      {"env.max_episode_steps", "200", "episode timeout"},
      {"env.action_set", "goal_relative", "goal_relative or cardinal"},
      {"env.step_reward", "-1", "reward for every step"},
      {"env.collision_penalty", "-4", "added when a move is blocked"},
      {"env.goal_reward", "0", "added when the goal is reached"},
      {"env.start_rule", "fixed", "fixed or uniform_random_free"},
      {"env.start_x", "3", "fixed start x"},
      {"env.start_y", "10", "fixed start y"},
      {"env.obstacle_sense_range", "5", "obstacle distance saturates here"},
      {"env.features", "goal_distance,obstacle_angle,obstacle_distance,x,y",
       "observation layout"},
      {"harness.train_steps", "100000", "training steps per trial"},
      {"harness.eval_steps", "10000", "greedy evaluation steps per trial"},
      {"harness.trials", "10", "independent trials"},
      {"harness.seed", "1", "first seed; trial k uses seed + k unless harness.seeds is set"},
      {"harness.seeds", "", "explicit comma-separated seeds, one per trial"},
      {"harness.output_dir", "", "run directory (overrides the output root)"},
      {"harness.threads", "1", "trials run concurrently"},
      {"harness.curve", "true", "evaluate the tree before every split (curve.csv)"},
      {"harness.write_metrics", "true", "write per-step metrics.csv"},
      {"harness.success_threshold", "-50", "evaluation reward a trial must beat to count as successful"},
      {"sweep.max_total_steps", "20000000000", "refuse sweeps estimated above this many env steps"},
  };
  return keys;
}

bool is_config_key(std::string_view name) {
  for (const auto& k : config_keys()) {
    if (k.name == name) return true;
  }
  return false;
}

std::vector<std::string> split_list(std::string_view csv) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (char c : csv) {
    if (c == ',') {
      flush();
    } else if (c != ' ' && c != '\t') {
      cur += c;
    }
  }
  flush();
  return out;
}

Config::Config() {
  for (const auto& k : config_keys()) values_[k.name] = Entry{k.default_value};
}

void Config::set(const std::string& key, const std::string& value, ValueSource source) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
  it->second = Entry{value, source};
}

void Config::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
  }
  set(std::string(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1)),
      ValueSource::override_value);
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
  return it->second.value;
}

ValueSource Config::source(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
  return it->second.source;
}

void Config::set_grid(std::vector<std::pair<std::string, std::vector<std::string>>> grid) {
  for (const auto& [key, values] : grid) {
    if (!is_config_key(key)) throw ConfigError(fmt::format("grid: unknown config key '{}'", key));
  }
  grid_ = std::move(grid);
}

Config Config::parse(std::string_view text, const std::string& origin) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}: line {}: {}", origin, e.line(), e.message()));
  }
  Config config;
  std::vector<std::pair<std::string, std::vector<std::string>>> grid;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(fmt::format("{}: '{}' must be inside a section", origin, section));
    }
    for (const auto& [key, value] : body) {
      const std::string raw = value.get_value<std::string>();
      if (section == "grid") {
        std::istringstream words(raw);
        std::vector<std::string> values{std::istream_iterator<std::string>(words), {}};
        grid.emplace_back(key, std::move(values));
      } else {
        config.set(section + "." + key, raw, ValueSource::file);
      }
    }
  }
  config.set_grid(std::move(grid));
  return config;
}

Config Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  Config config = parse(buffer.str(), path.string());
  // Relative map paths are resolved against the config file's directory.
  const std::string& map = config.get("env.map_file");
  if (!map.empty() && std::filesystem::path(map).is_relative()) {
    config.set("env.map_file", std::filesystem::absolute(path.parent_path() / map).lexically_normal().string(),
               config.source("env.map_file"));
  }
  return config;
}

namespace {

double as_double(const Config& c, const std::string& key) {
  const std::string& s = c.get(key);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, s));
  }
  return v;
}

std::uint64_t as_uint(const Config& c, const std::string& key) {
  const std::string& s = c.get(key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  // Accept integral values written in floating-point form, e.g. 1e5.
  const double d = as_double(c, key);
  if (d < 0.0 || d != static_cast<double>(static_cast<std::uint64_t>(d))) {
    throw ConfigError(fmt::format("{}: expected a non-negative integer, got '{}'", key, s));
  }
  return static_cast<std::uint64_t>(d);
}

bool as_bool(const Config& c, const std::string& key) {
  const std::string& s = c.get(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, s));
}

template <typename F>
auto keyed(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", key, e.what()));
  }
}

}  // namespace

ExperimentConfig Config::resolve() const {
  ExperimentConfig x;
  const std::string& method = get("method.name");
  if (method == "cqi") {
    x.method = Method::cqi;
  } else if (method == "pyeatt") {
    x.method = Method::pyeatt;
  } else {
    throw ConfigError(fmt::format("method.name: unknown method '{}'", method));
  }

  EpsilonSchedule eps{as_double(*this, "method.epsilon_start"),
                      as_double(*this, "method.epsilon_end"),
                      as_uint(*this, "method.epsilon_decay_steps")};
  x.cqi.alpha = as_double(*this, "method.alpha");
  x.cqi.gamma = as_double(*this, "method.gamma");
  x.cqi.split_threshold_max = as_double(*this, "method.split_thresh_max");
  x.cqi.split_threshold_decay = as_double(*this, "method.split_thresh_decay");
  x.cqi.visit_decay = as_double(*this, "method.visit_decay");
  x.cqi.num_splits = as_uint(*this, "method.num_splits");
  x.cqi.q_init = as_double(*this, "method.q_init");
  x.cqi.epsilon = eps;

  x.pyeatt.alpha = x.cqi.alpha;
  x.pyeatt.gamma = x.cqi.gamma;
  x.pyeatt.hist_min = as_uint(*this, "method.hist_min");
  x.pyeatt.num_splits = x.cqi.num_splits;
  x.pyeatt.q_init = x.cqi.q_init;
  x.pyeatt.visit_decay = x.cqi.visit_decay;
  x.pyeatt.epsilon = eps;

  RobotNavConfig& env = x.env;
  env.width = as_double(*this, "env.width");
  env.height = as_double(*this, "env.height");
  env.goal = {as_double(*this, "env.goal_x"), as_double(*this, "env.goal_y")};
  env.goal_radius = as_double(*this, "env.goal_radius");
  env.obstacles = keyed("env.obstacles", [&] { return parse_obstacles(get("env.obstacles")); });
  env.step_size = as_double(*this, "env.step_size");
  env.max_episode_steps = static_cast<int>(as_uint(*this, "env.max_episode_steps"));
  env.action_set = keyed("env.action_set", [&] { return parse_action_set(get("env.action_set")); });
  env.step_reward = as_double(*this, "env.step_reward");
  env.collision_penalty = as_double(*this, "env.collision_penalty");
  env.goal_reward = as_double(*this, "env.goal_reward");
  env.start_rule = keyed("env.start_rule", [&] { return parse_start_rule(get("env.start_rule")); });
  env.start = {as_double(*this, "env.start_x"), as_double(*this, "env.start_y")};
  env.obstacle_sense_range = as_double(*this, "env.obstacle_sense_range");
  env.features = keyed("env.features", [&] { return parse_features(get("env.features")); });
  if (const std::string& map = get("env.map_file"); !map.empty()) {
    std::ifstream in(map);
    if (!in) throw ConfigError(fmt::format("env.map_file: cannot read '{}'", map));
    std::stringstream text;
    text << in.rdbuf();
    env = keyed("env.map_file",
                [&] { return apply_map(env, text.str(), as_double(*this, "env.map_cell_size")); });
  }

  x.train_steps = as_uint(*this, "harness.train_steps");
  x.eval_steps = as_uint(*this, "harness.eval_steps");
  x.trials = as_uint(*this, "harness.trials");
  if (const std::string& list = get("harness.seeds"); !list.empty()) {
    for (const std::string& s : split_list(list)) {
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError(fmt::format("harness.seeds: bad seed '{}'", s));
      }
      x.seeds.push_back(v);
    }
  } else {
    const std::uint64_t base = as_uint(*this, "harness.seed");
    for (std::size_t k = 0; k < x.trials; ++k) x.seeds.push_back(base + k);
  }
  x.output_dir = get("harness.output_dir");
  x.threads = as_uint(*this, "harness.threads");
  x.record_curve = as_bool(*this, "harness.curve");
  x.write_metrics = as_bool(*this, "harness.write_metrics");
  x.success_threshold = as_double(*this, "harness.success_threshold");
  as_uint(*this, "sweep.max_total_steps");

  x.validate();
  return x;
}

std::string Config::snapshot() const {
  std::string out = "; resolved configuration (precedence: override > file > default)\n";
  std::string section;
  for (const auto& k : config_keys()) {
    const auto dot = k.name.find('.');
    const std::string sec = k.name.substr(0, dot);
    if (sec != section) {
      out += fmt::format("\n[{}]\n", sec);
      section = sec;
    }
    const Entry& e = values_.at(k.name);
    out += fmt::format("; {}\n{} = {}\n", to_string(e.source), k.name.substr(dot + 1), e.value);
  }
  if (!grid_.empty()) {
    out += "\n[grid]\n";
    for (const auto& [key, values] : grid_) {
      out += fmt::format("{} = {}\n", key, fmt::join(values, " "));
    }
  }
  return out;
}

}  // namespace cqi
