#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cqi/cqi.hpp"
#include "cqi/pyeatt.hpp"
#include "cqi/robot_nav.hpp"

namespace cqi {

enum class Method { cqi, pyeatt };

std::string_view to_string(Method m);

/// Everything needed to reproduce one experiment.
struct ExperimentConfig {
  Method method = Method::cqi;
  CqiParams cqi;
  pyeatt::Params pyeatt;
  RobotNavConfig env;
  std::uint64_t train_steps = 100000;
  std::uint64_t eval_steps = 10000;
  std::size_t trials = 10;
  /// One seed per trial.
  std::vector<std::uint64_t> seeds;
  /// Empty: nothing is written.
  std::filesystem::path output_dir;
  bool record_curve = true;
  bool write_metrics = true;
  /// Trials whose evaluation reward is at or below this are flagged.
  double success_threshold = -50.0;
  std::size_t threads = 1;

  void validate() const;
};

/// Where a resolved value came from, lowest to highest precedence.
enum class ValueSource { default_value, file, override_value };

std::string_view to_string(ValueSource s);

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

/// Every recognised key, in documentation order.
const std::vector<ConfigKey>& config_keys();
bool is_config_key(std::string_view name);

/// Flat "section.key" -> value map layered over the defaults. Files use INI
/// syntax ([method], [env], [harness], [sweep], and [grid] for sweeps).
class Config {
 public:
  Config();

  static Config load_file(const std::filesystem::path& path);
  static Config parse(std::string_view text, const std::string& origin = "<string>");

  /// Throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value, ValueSource source);
  /// Applies "key=value".
  void apply_override(std::string_view assignment);

  const std::string& get(const std::string& key) const;
  ValueSource source(const std::string& key) const;

  /// Swept keys and their values, from the [grid] section (values separated
  /// by whitespace).
  const std::vector<std::pair<std::string, std::vector<std::string>>>& grid() const {
    return grid_;
  }
  void set_grid(std::vector<std::pair<std::string, std::vector<std::string>>> grid);

  /// Resolves and validates. Errors name the offending key.
  ExperimentConfig resolve() const;

  /// INI text that reproduces this configuration, with the source of each
  /// value as a comment.
  std::string snapshot() const;

 private:
  struct Entry {
    std::string value;
    ValueSource source = ValueSource::default_value;
  };
  std::map<std::string, Entry> values_;
  std::vector<std::pair<std::string, std::vector<std::string>>> grid_;
};

std::vector<std::string> split_list(std::string_view csv);

}  // namespace cqi
