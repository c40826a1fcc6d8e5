#include "cqi/harness.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "cqi/cqi.hpp"
#include "cqi/pyeatt.hpp"
#include "cqi/robot_nav.hpp"
#include "cqi/tree_io.hpp"

namespace cqi {

EvalOutcome evaluate_policy(const PolicyTree& tree, Environment& env, std::uint64_t eval_steps,
                            Rng& rng) {
  if (tree.dimension() != env.feature_dimension() || tree.action_count() != env.action_count()) {
    throw ContractViolation("evaluate_policy: tree does not match the environment");
  }
  EvalOutcome out;
  double episode_reward = 0.0;
  StateVector state = env.reset(rng);
  for (std::uint64_t step = 0; step < eval_steps; ++step) {
    Transition t = env.step(tree.act(state), rng);
    episode_reward += t.reward;
    if (t.done) {
      out.total_reward += episode_reward;
      ++out.episodes;
      episode_reward = 0.0;
      state = env.reset(rng);
    } else {
      state = std::move(t.next_state);
    }
  }
  if (out.episodes > 0) out.average = out.total_reward / static_cast<double>(out.episodes);
  return out;
}

std::vector<CurvePoint> size_reward_curve(const std::vector<Checkpoint>& checkpoints,
                                          const PolicyTree& final_tree,
                                          std::uint64_t train_steps, Environment& env,
                                          std::uint64_t eval_steps, std::uint64_t eval_seed) {
  std::vector<CurvePoint> curve;
  auto evaluate = [&](const PolicyTree& tree, std::uint64_t step) {
    Rng rng(eval_seed);
    curve.push_back({tree.size(), evaluate_policy(tree, env, eval_steps, rng).average, step});
  };
  for (const Checkpoint& c : checkpoints) evaluate(c.tree, c.step);
  evaluate(final_tree, train_steps);
  return curve;
}

std::uint64_t eval_seed_for(std::uint64_t trial_seed) {
  return trial_seed ^ 0x9e3779b97f4a7c15ULL;
}

namespace {

std::string format_reward(const std::optional<double>& r) {
  return r ? fmt::format("{}", *r) : std::string("none");
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& config, std::size_t index,
                      const std::filesystem::path& trial_dir) {
  TrialResult r;
  r.index = index;
  r.seed = config.seeds.at(index);
  try {
    RobotNav env(config.env);
    Rng rng(r.seed);
    TrainOptions options;
    options.record_metrics = config.write_metrics && !trial_dir.empty();
    options.record_checkpoints = config.record_curve;
    TrainResult trained =
        config.method == Method::cqi
            ? train_cqi(env, config.cqi, config.train_steps, rng, options)
            : pyeatt::train(env, config.pyeatt, config.train_steps, rng, options);

    r.tree_size = trained.tree.size();
    r.splits = trained.splits;
    r.train_episodes = trained.episodes;

    RobotNav eval_env(config.env);
    const std::uint64_t eval_seed = eval_seed_for(r.seed);
    Rng eval_rng(eval_seed);
    r.eval = evaluate_policy(trained.tree, eval_env, config.eval_steps, eval_rng);
    r.successful = r.eval.average && *r.eval.average > config.success_threshold;
    if (config.record_curve) {
      r.curve = size_reward_curve(trained.checkpoints, trained.tree, config.train_steps, eval_env,
                                  config.eval_steps, eval_seed);
    }

    if (!trial_dir.empty()) {
      std::filesystem::create_directories(trial_dir);
      const TreeLabels labels{env.feature_names(), env.action_names()};
      write_file(trial_dir / "tree_final.txt", export_text(trained.tree, labels));
      write_file(trial_dir / "tree_final.dot", export_dot(trained.tree, labels));
      if (options.record_metrics) {
        std::ofstream out(trial_dir / "metrics.csv", std::ios::binary);
        trained.metrics.write_csv(out);
      }
      if (config.record_curve) {
        std::string csv = "tree_size,reward,step\n";
        for (const CurvePoint& p : r.curve) {
          csv += fmt::format("{},{},{}\n", p.tree_size, format_reward(p.reward), p.step);
        }
        write_file(trial_dir / "curve.csv", csv);
      }
    }
  } catch (const std::exception& e) {
    TrialResult failed;
    failed.index = index;
    failed.seed = r.seed;
    failed.error = e.what();
    if (failed.error.empty()) failed.error = "unknown error";
    return failed;
  }
  return r;
}

Aggregate aggregate(const std::vector<TrialResult>& trials) {
  Aggregate a;
  a.trials = trials.size();
  std::vector<double> sizes;
  std::vector<double> rewards;
  for (const TrialResult& t : trials) {
    if (t.failed()) {
      ++a.failed;
      continue;
    }
    sizes.push_back(static_cast<double>(t.tree_size));
    if (t.eval.average) rewards.push_back(*t.eval.average);
    if (t.successful) ++a.successful;
  }
  a.evaluated = rewards.size();
  a.mean_size = mean_of(sizes);
  a.std_size = sample_std(sizes, a.mean_size);
  a.mean_reward = mean_of(rewards);
  a.std_reward = sample_std(rewards, a.mean_reward);
  return a;
}

void write_summary_csv(std::ostream& out, const std::vector<TrialResult>& trials) {
  out << "trial,seed,status,tree_size,splits,train_episodes,eval_reward,eval_episodes,"
         "successful,error\n";
  for (const TrialResult& t : trials) {
    if (t.failed()) {
      out << fmt::format("{},{},failed,,,,,,0,{}\n", t.index, t.seed, csv_quote(t.error));
    } else {
      out << fmt::format("{},{},ok,{},{},{},{},{},{},\n", t.index, t.seed, t.tree_size, t.splits,
                         t.train_episodes, format_reward(t.eval.average), t.eval.episodes,
                         t.successful ? 1 : 0);
    }
  }
}

void write_aggregate_csv(std::ostream& out, Method method, const Aggregate& a) {
  out << "method,trials,failed,evaluated,successful,mean_size,std_size,mean_reward,std_reward\n";
  out << fmt::format("{},{},{},{},{},{},{},{},{}\n", to_string(method), a.trials, a.failed,
                     a.evaluated, a.successful, a.mean_size, a.std_size, a.mean_reward,
                     a.std_reward);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& snapshot) {
  config.validate();
  const std::filesystem::path& root = config.output_dir;
  if (!root.empty()) {
    std::filesystem::create_directories(root);
    write_file(root / "config.snapshot", snapshot);
  }
  auto trial_dir = [&](std::size_t k) {
    return root.empty() ? std::filesystem::path{} : root / fmt::format("trial_{:02}", k);
  };

  ExperimentResult result;
  result.trials.resize(config.trials);
  const std::size_t workers = std::min(config.threads, config.trials);
  if (workers <= 1) {
    for (std::size_t k = 0; k < config.trials; ++k) {
      result.trials[k] = run_trial(config, k, trial_dir(k));
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < config.trials; k = next++) {
          result.trials[k] = run_trial(config, k, trial_dir(k));
        }
      });
    }
  }
  result.summary = aggregate(result.trials);

  if (!root.empty()) {
    std::ofstream summary(root / "summary.csv", std::ios::binary);
    write_summary_csv(summary, result.trials);
    std::ofstream agg(root / "aggregate.csv", std::ios::binary);
    write_aggregate_csv(agg, config.method, result.summary);
  }
  return result;
}

namespace {

std::vector<std::vector<std::pair<std::string, std::string>>> grid_points(const Config& base) {
  const auto& grid = base.grid();
  std::vector<std::vector<std::pair<std::string, std::string>>> points;
  if (grid.empty()) return points;
  for (const auto& [key, values] : grid) {
    if (values.empty()) return {};
  }
  std::vector<std::size_t> idx(grid.size(), 0);
  while (true) {
    std::vector<std::pair<std::string, std::string>> point;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      point.emplace_back(grid[g].first, grid[g].second[idx[g]]);
    }
    points.push_back(std::move(point));
    std::size_t g = grid.size();
    while (g > 0) {
      --g;
      if (++idx[g] < grid[g].second.size()) break;
      idx[g] = 0;
      if (g == 0) return points;
    }
  }
}

Config config_at(const Config& base, const std::vector<std::pair<std::string, std::string>>& point) {
  Config c = base;
  for (const auto& [key, value] : point) c.set(key, value, ValueSource::override_value);
  c.set_grid({});
  return c;
}

}  // namespace

std::uint64_t estimate_sweep_steps(const Config& base) {
  std::uint64_t total = 0;
  for (const auto& point : grid_points(base)) {
    const ExperimentConfig x = config_at(base, point).resolve();
    total += x.trials * (x.train_steps + x.eval_steps);
  }
  return total;
}

std::vector<SweepRow> run_sweep(const Config& base) {
  const ExperimentConfig root_config = base.resolve();
  const auto points = grid_points(base);
  const std::uint64_t estimate = estimate_sweep_steps(base);
  const std::string& cap_text = base.get("sweep.max_total_steps");
  const double cap = std::stod(cap_text);
  if (static_cast<double>(estimate) > cap) {
    throw ConfigError(fmt::format(
        "sweep.max_total_steps: sweep needs an estimated {} environment steps over {} points, "
        "above the cap of {}",
        estimate, points.size(), cap_text));
  }

  const std::filesystem::path& root = root_config.output_dir;
  std::vector<SweepRow> rows;
  for (std::size_t p = 0; p < points.size(); ++p) {
    Config c = config_at(base, points[p]);
    if (!root.empty()) {
      c.set("harness.output_dir", (root / fmt::format("point_{:02}", p)).string(),
            ValueSource::override_value);
    }
    const ExperimentConfig x = c.resolve();
    rows.push_back({points[p], run_experiment(x, c.snapshot()).summary});
  }
  if (!root.empty()) {
    std::filesystem::create_directories(root);
    write_file(root / "config.snapshot", base.snapshot());
    std::ofstream out(root / "sweep.csv", std::ios::binary);
    write_sweep_csv(out, rows);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  std::string header;
  if (!rows.empty()) {
    for (const auto& [key, value] : rows.front().params) header += key + ",";
  }
  out << header
      << "trials,failed,evaluated,successful,mean_size,std_size,mean_reward,std_reward\n";
  for (const SweepRow& row : rows) {
    for (const auto& [key, value] : row.params) out << csv_quote(value) << ',';
    const Aggregate& a = row.summary;
    out << fmt::format("{},{},{},{},{},{},{},{}\n", a.trials, a.failed, a.evaluated, a.successful,
                       a.mean_size, a.std_size, a.mean_reward, a.std_reward);
  }
}

}  // namespace cqi
