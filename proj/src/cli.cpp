#include "cqi/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cqi/config.hpp"
#include "cqi/harness.hpp"
#include "cqi/robot_nav.hpp"
#include "cqi/tree_io.hpp"

namespace cqi {
namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string tree_path;
  std::string format = "text";
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Config load_config(const Options& o) {
  Config c = o.config_path.empty() ? Config{} : Config::load_file(o.config_path);
  for (const std::string& kv : o.overrides) c.apply_override(kv);
  if (o.seed) {
    c.set("harness.seed", std::to_string(*o.seed), ValueSource::override_value);
    c.set("harness.seeds", "", ValueSource::override_value);
  }
  return c;
}

/// --output, then harness.output_dir, then <root>/<config name>_s<seed>.
void choose_output_dir(Config& c, const Options& o) {
  if (!o.output.empty()) {
    c.set("harness.output_dir", o.output, ValueSource::override_value);
    return;
  }
  if (!c.get("harness.output_dir").empty()) return;
  const char* root = std::getenv(kOutputRootVariable);
  const std::string stem =
      o.config_path.empty() ? "default" : std::filesystem::path(o.config_path).stem().string();
  const std::filesystem::path dir = std::filesystem::path(root && *root ? root : "runs") /
                                    fmt::format("{}_s{}", stem, c.get("harness.seed"));
  c.set("harness.output_dir", dir.string(), ValueSource::override_value);
}

std::string key_listing() {
  std::string text = "Configuration keys (default in brackets):\n";
  for (const ConfigKey& k : config_keys()) {
    text += fmt::format("  {} [{}]\n      {}\n", k.name, k.default_value, k.help);
  }
  text += fmt::format("\nRun directories default to ${}/<config>_s<seed> (else runs/).\n",
                      kOutputRootVariable);
  return text;
}

int cmd_train(const Options& o, std::ostream& out) {
  Config c = load_config(o);
  choose_output_dir(c, o);
  const ExperimentConfig x = c.resolve();
  const ExperimentResult r = run_experiment(x, c.snapshot());
  const Aggregate& a = r.summary;
  out << fmt::format("{}: {} trials ({} failed), tree size {:.2f} +/- {:.2f}, reward {:.2f} +/- {:.2f}\n",
                     to_string(x.method), a.trials, a.failed, a.mean_size, a.std_size,
                     a.mean_reward, a.std_reward);
  out << "wrote " << x.output_dir.string() << "\n";
  return a.failed == a.trials ? 1 : 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const ExperimentConfig x = load_config(o).resolve();
  const ParsedTree parsed = parse_text_tree(read_text(o.tree_path));
  RobotNav env(x.env);
  if (parsed.tree.dimension() != env.feature_dimension()) {
    throw ConfigError(fmt::format("tree has {} features, env.features gives {}",
                                  parsed.tree.dimension(), env.feature_dimension()));
  }
  Rng rng(eval_seed_for(x.seeds.front()));
  const EvalOutcome e = evaluate_policy(parsed.tree, env, x.eval_steps, rng);
  if (!e.average) {
    out << fmt::format("no completed episodes in {} steps\n", x.eval_steps);
    return 1;
  }
  out << fmt::format("average reward {} over {} episodes (tree size {})\n", *e.average, e.episodes,
                     parsed.tree.size());
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  Config c = load_config(o);
  choose_output_dir(c, o);
  const std::vector<SweepRow> rows = run_sweep(c);
  write_sweep_csv(out, rows);
  return 0;
}

int cmd_export(const Options& o, std::ostream& out) {
  const TreeFormat format = parse_tree_format(o.format);
  const ParsedTree parsed = parse_text_tree(read_text(o.tree_path));
  const std::string text = export_tree(parsed.tree, format, parsed.labels);
  if (o.output.empty()) {
    out << text;
  } else {
    std::ofstream file(o.output, std::ios::binary);
    if (!file) throw std::runtime_error(fmt::format("cannot write '{}'", o.output));
    file << text;
  }
  return 0;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const Config c = load_config(o);
  c.resolve();
  out << c.snapshot();
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decision-tree policy learning with conservative Q-improvement", "cqi"};
  app.require_subcommand(1);
  app.footer(key_listing());
  Options o;

  auto add_config = [&](CLI::App* sub, bool positional) {
    if (positional) {
      sub->add_option("config", o.config_path, "Config file")->required();
    } else {
      sub->add_option("-c,--config", o.config_path, "Config file");
    }
    sub->add_option("-s,--set", o.overrides, "Override a config key (key=value), repeatable");
  };

  CLI::App* train = app.add_subcommand("train", "Train and evaluate every trial");
  add_config(train, false);
  train->add_option("--seed", o.seed, "First trial seed");
  train->add_option("-o,--output", o.output, "Run directory");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a saved tree greedily");
  eval->add_option("tree", o.tree_path, "Tree in text format")->required();
  add_config(eval, false);
  eval->add_option("--seed", o.seed, "Trial seed the evaluation seed derives from");

  CLI::App* sweep = app.add_subcommand("sweep", "Run the [grid] cross-product");
  add_config(sweep, false);
  sweep->add_option("-o,--output", o.output, "Sweep directory");

  CLI::App* exp = app.add_subcommand("export-tree", "Convert a text tree to text or DOT");
  exp->add_option("tree", o.tree_path, "Tree in text format")->required();
  exp->add_option("-f,--format", o.format, "text or dot");
  exp->add_option("-o,--output", o.output, "Output file (default: standard output)");

  CLI::App* validate = app.add_subcommand("validate-config", "Check a config and print it resolved");
  add_config(validate, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) return cmd_train(o, out);
    if (*eval) return cmd_eval(o, out);
    if (*sweep) return cmd_sweep(o, out);
    if (*exp) return cmd_export(o, out);
    return cmd_validate(o, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cqi
