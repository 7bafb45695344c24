#pragma once

// Flat "key = value" run configuration with '#' comments. Layers apply in
// order defaults < file < environment (ATISE_<KEY>) < command-line flags.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "atise/data.hpp"
#include "atise/model.hpp"
#include "atise/trainer.hpp"

namespace atise {

enum class ValueType : std::uint8_t { kString, kInt, kUInt, kDouble, kBool, kChoice };

enum CommandMask : unsigned {
  kPreprocessCmd = 1u << 0,
  kTrainCmd = 1u << 1,
  kEvalCmd = 1u << 2,
  kInspectCmd = 1u << 3,
};

struct KeySpec {
  std::string_view name;
  ValueType type;
  std::string_view default_value;
  unsigned commands;
  std::string_view help;
  std::vector<std::string_view> choices = {};
};

inline constexpr std::string_view kEnvPrefix = "ATISE_";

class RunConfig {
 public:
  RunConfig();

  static const std::vector<KeySpec>& schema();
  static const KeySpec* find_key(std::string_view name);
  // "batch_size" -> "batch-size"
  static std::string flag_name(std::string_view key);
  static std::string env_name(std::string_view key);

  // Throws ConfigError for unknown keys and values that do not parse.
  void set(std::string_view key, std::string_view value);
  void load_text(std::string_view text, std::string_view origin = "config");
  void load_file(const std::filesystem::path& path);
  using EnvLookup = std::function<const char*(const char*)>;
  void apply_env(const EnvLookup& lookup);

  const std::string& get(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  std::uint64_t get_uint(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;

  ModelConfig model_config() const;
  TrainConfig train_config() const;
  TimelineOptions timeline_options() const;

  // Effective values of every key used by the commands in `mask`.
  std::string to_text(unsigned mask) const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace atise
