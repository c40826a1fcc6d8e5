#include <doctest.h>

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "cqi/cli.hpp"
#include "cqi/config.hpp"
#include "support.hpp"

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cqi");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = cqi::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string config_path(const std::string& name) {
  return (std::filesystem::path(CQI_SOURCE_DIR) / "configs" / name).string();
}

const std::vector<std::string> kQuick = {"-s", "harness.train_steps=500", "-s",
                                         "harness.eval_steps=300", "-s", "harness.trials=2"};

std::vector<std::string> with_quick(std::vector<std::string> args) {
  args.insert(args.end(), kQuick.begin(), kQuick.end());
  return args;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate-config prints the resolved configuration") {
  const CliRun r = cli({"validate-config", config_path("cqi_reward_opt.cfg")});
  CHECK(r.code == 0);
  CHECK(r.out.find("[method]") != std::string::npos);
  CHECK(r.out.find("; file\nalpha = 0.01\n") != std::string::npos);
}

TEST_CASE("configuration errors exit with 2 and name the key") {
  testing::TempDir dir("cli_bad");
  testing::write_file(dir.path() / "bad.cfg", "[method]\nalpha = 1.5\n");
  CliRun r = cli({"validate-config", (dir.path() / "bad.cfg").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("method.alpha") != std::string::npos);

  r = cli({"validate-config", (dir.path() / "absent.cfg").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("absent.cfg") != std::string::npos);

  r = cli({"validate-config", config_path("cqi_reward_opt.cfg"), "-s", "method.zeta=1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("method.zeta") != std::string::npos);

  r = cli({"train", "-s", "harness.trials=0"});
  CHECK(r.code == 2);
  CHECK(r.err.find("harness.trials") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"fly"}).code == 2);
  CHECK(cli({"train", "--no-such-flag"}).code == 2);
  CHECK(cli({"export-tree"}).code == 2);
}

TEST_CASE("help lists every configuration key with its default") {
  const CliRun r = cli({"--help"});
  CHECK(r.code == 0);
  for (const cqi::ConfigKey& k : cqi::config_keys()) {
    CAPTURE(k.name);
    CHECK(r.out.find(fmt::format("  {} [{}]", k.name, k.default_value)) != std::string::npos);
  }
  for (const char* sub : {"train", "eval", "sweep", "export-tree", "validate-config"}) {
    CHECK(r.out.find(sub) != std::string::npos);
  }
}

TEST_CASE("train, export-tree and eval work together") {
  testing::TempDir dir("cli_train");
  const std::string run = (dir.path() / "run").string();
  const CliRun trained = cli(with_quick({"train", "-c", config_path("cqi_reward_opt.cfg"),
                                         "--seed", "7", "-o", run}));
  CHECK(trained.code == 0);
  CHECK(trained.out.find("wrote") != std::string::npos);
  for (const char* f : {"config.snapshot", "summary.csv", "aggregate.csv", "trial_00/tree_final.txt",
                        "trial_00/tree_final.dot", "trial_00/metrics.csv", "trial_00/curve.csv",
                        "trial_01/tree_final.txt"}) {
    CAPTURE(f);
    CHECK(std::filesystem::exists(std::filesystem::path(run) / f));
  }
  const std::string summary = testing::read_file(std::filesystem::path(run) / "summary.csv");
  CHECK(summary.find("\n0,7,ok,") != std::string::npos);
  CHECK(summary.find("\n1,8,ok,") != std::string::npos);
  CHECK(testing::read_file(std::filesystem::path(run) / "config.snapshot").find("seed = 7") !=
        std::string::npos);

  const std::string tree = (std::filesystem::path(run) / "trial_00" / "tree_final.txt").string();
  const CliRun dot = cli({"export-tree", tree, "--format", "dot"});
  CHECK(dot.code == 0);
  CHECK(dot.out.rfind("digraph", 0) == 0);
  const CliRun text = cli({"export-tree", tree, "-f", "text"});
  CHECK(text.out == testing::read_file(tree));
  const std::string dot_file = (dir.path() / "t.dot").string();
  CHECK(cli({"export-tree", tree, "-f", "dot", "-o", dot_file}).code == 0);
  CHECK(testing::read_file(dot_file) == dot.out);
  CHECK(cli({"export-tree", tree, "-f", "png"}).code == 2);

  const CliRun evaluated = cli({"eval", tree, "-c", config_path("cqi_reward_opt.cfg")});
  CHECK(evaluated.code == 0);
  CHECK(evaluated.out.find("average reward") != std::string::npos);
  const CliRun again = cli({"eval", tree, "-c", config_path("cqi_reward_opt.cfg")});
  CHECK(again.out == evaluated.out);
}

TEST_CASE("eval rejects a tree built for other features") {
  testing::TempDir dir("cli_eval");
  const auto tree = dir.path() / "tree.txt";
  testing::write_file(tree, "# feature 0 f 0 1\n# action 0 a\n# action 1 b\naction: a  # Q: [0, 1]\n");
  const CliRun r = cli({"eval", tree.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("env.features") != std::string::npos);
}

TEST_CASE("run directories default under the output root variable") {
  testing::TempDir dir("cli_root");
  ::setenv(cqi::kOutputRootVariable, dir.path().c_str(), 1);
  const CliRun r = cli(with_quick({"train", "-c", config_path("pyeatt_best.cfg"), "--seed", "3"}));
  ::unsetenv(cqi::kOutputRootVariable);
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(dir.path() / "pyeatt_best_s3" / "summary.csv"));
}

TEST_CASE("sweep prints its table") {
  testing::TempDir dir("cli_sweep");
  testing::write_file(dir.path() / "grid.cfg",
                      "[harness]\ntrain_steps = 200\neval_steps = 200\ntrials = 1\ncurve = false\n"
                      "[grid]\nmethod.num_splits = 2 3\n");
  const CliRun r = cli({"sweep", "-c", (dir.path() / "grid.cfg").string(), "-o",
                        (dir.path() / "out").string()});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("method.num_splits,trials,", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);
  CHECK(testing::read_file(dir.path() / "out" / "sweep.csv") == r.out);
}

}
