#include "atise/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "atise/container.hpp"
#include "atise/error.hpp"

namespace atise {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool parse_bool(std::string_view text, bool& out) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") {
    out = true;
    return true;
  }
  if (text == "false" || text == "0" || text == "no" || text == "off") {
    out = false;
    return true;
  }
  return false;
}

void check_value(const KeySpec& spec, std::string_view value) {
  bool ok = true;
  switch (spec.type) {
    case ValueType::kString: break;
    case ValueType::kInt: {
      std::int64_t v = 0;
      ok = parse_number(value, v);
      break;
    }
    case ValueType::kUInt: {
      std::uint64_t v = 0;
      ok = parse_number(value, v);
      break;
    }
    case ValueType::kDouble: {
      double v = 0;
      ok = parse_number(value, v);
      break;
    }
    case ValueType::kBool: {
      bool v = false;
      ok = parse_bool(value, v);
      break;
    }
    case ValueType::kChoice:
      ok = std::find(spec.choices.begin(), spec.choices.end(), value) != spec.choices.end();
      break;
  }
  if (!ok) throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(spec.name) + "'");
}

}  // namespace

const std::vector<KeySpec>& RunConfig::schema() {
  static const std::vector<KeySpec> keys = {
      {"out_dir", ValueType::kString, "out", kPreprocessCmd | kTrainCmd, "output directory"},
      {"bundle", ValueType::kString, "", kTrainCmd | kEvalCmd | kInspectCmd, "dataset bundle file"},
      {"checkpoint", ValueType::kString, "", kEvalCmd | kInspectCmd, "checkpoint file"},
      {"threads", ValueType::kInt, "1", kTrainCmd | kEvalCmd, "worker threads; 1 is bitwise reproducible, 0 = all"},
      {"format", ValueType::kChoice, "point", kPreprocessCmd, "input format", {"point", "interval"}},
      {"train_file", ValueType::kString, "", kPreprocessCmd, "training facts"},
      {"valid_file", ValueType::kString, "", kPreprocessCmd, "validation facts"},
      {"test_file", ValueType::kString, "", kPreprocessCmd, "test facts"},
      {"granularity", ValueType::kChoice, "day", kPreprocessCmd, "time granularity", {"day", "year"}},
      {"n_bins", ValueType::kInt, "0", kPreprocessCmd, "number of year bins (year granularity)"},
      {"reciprocal", ValueType::kBool, "false", kPreprocessCmd, "add inverse relations"},
      {"d", ValueType::kInt, "500", kTrainCmd, "embedding dimensionality"},
      {"variant", ValueType::kChoice, "full", kTrainCmd, "model variant", {"full", "sn", "tn", "ts"}},
      {"c_min", ValueType::kDouble, "0.005", kTrainCmd, "lower variance bound"},
      {"c_max", ValueType::kDouble, "0.5", kTrainCmd, "upper variance bound"},
      {"lr", ValueType::kDouble, "3e-05", kTrainCmd, "Adam learning rate"},
      {"batch_size", ValueType::kInt, "512", kTrainCmd, "positives per minibatch"},
      {"eta", ValueType::kInt, "10", kTrainCmd, "negatives per positive"},
      {"gamma", ValueType::kDouble, "1", kTrainCmd, "loss margin"},
      {"adv_temp", ValueType::kDouble, "1", kTrainCmd, "self-adversarial temperature"},
      {"max_epochs", ValueType::kInt, "5000", kTrainCmd, "epoch cap"},
      {"patience", ValueType::kInt, "20", kTrainCmd, "stale validations before stopping"},
      {"eval_every", ValueType::kInt, "25", kTrainCmd, "epochs between validations"},
      {"seed", ValueType::kUInt, "0", kTrainCmd, "random seed"},
      {"split", ValueType::kChoice, "test", kEvalCmd, "split to evaluate", {"train", "valid", "test"}},
      {"raw", ValueType::kBool, "false", kEvalCmd, "disable time-wise filtering"},
      {"dump_ranks", ValueType::kString, "", kEvalCmd, "write per-query ranks to this file"},
  };
  return keys;
}

const KeySpec* RunConfig::find_key(std::string_view name) {
  for (const auto& spec : schema()) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

std::string RunConfig::flag_name(std::string_view key) {
  std::string out(key);
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

std::string RunConfig::env_name(std::string_view key) {
  std::string out(kEnvPrefix);
  for (char c : key) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

RunConfig::RunConfig() {
  for (const auto& spec : schema()) values_.emplace(std::string(spec.name), std::string(spec.default_value));
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  value = trim(value);
  check_value(*spec, value);
  values_[std::string(key)] = std::string(value);
}

void RunConfig::load_text(std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set(trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  load_text(text, path.string());
}

void RunConfig::apply_env(const EnvLookup& lookup) {
  for (const auto& spec : schema()) {
    const std::string name = env_name(spec.name);
    if (const char* value = lookup(name.c_str())) {
      try {
        set(spec.name, value);
      } catch (const ConfigError& e) {
        throw ConfigError(name + ": " + e.what());
      }
    }
  }
}

const std::string& RunConfig::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  return it->second;
}

std::int64_t RunConfig::get_int(std::string_view key) const {
  std::int64_t v = 0;
  parse_number(get(key), v);
  return v;
}

std::uint64_t RunConfig::get_uint(std::string_view key) const {
  std::uint64_t v = 0;
  parse_number(get(key), v);
  return v;
}

double RunConfig::get_double(std::string_view key) const {
  double v = 0;
  parse_number(get(key), v);
  return v;
}

bool RunConfig::get_bool(std::string_view key) const {
  bool v = false;
  parse_bool(get(key), v);
  return v;
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.d = static_cast<std::int32_t>(get_int("d"));
  m.variant = parse_variant(get("variant"));
  m.c_min = get_double("c_min");
  m.c_max = get_double("c_max");
  return m;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.lr = get_double("lr");
  t.batch_size = static_cast<std::int32_t>(get_int("batch_size"));
  t.eta = static_cast<std::int32_t>(get_int("eta"));
  t.gamma = get_double("gamma");
  t.adv_temp = get_double("adv_temp");
  t.max_epochs = static_cast<std::int32_t>(get_int("max_epochs"));
  t.patience = static_cast<std::int32_t>(get_int("patience"));
  t.eval_every = static_cast<std::int32_t>(get_int("eval_every"));
  t.seed = get_uint("seed");
  t.threads = static_cast<std::int32_t>(get_int("threads"));
  return t;
}

TimelineOptions RunConfig::timeline_options() const {
  TimelineOptions options;
  options.granularity = get("granularity") == "year" ? Granularity::kYearBinned : Granularity::kDay;
  if (const auto bins = get_int("n_bins"); bins > 0) options.n_bins = static_cast<int>(bins);
  return options;
}

std::string RunConfig::to_text(unsigned mask) const {
  std::ostringstream out;
  for (const auto& spec : schema()) {
    if (spec.commands & mask) out << spec.name << " = " << get(spec.name) << '\n';
  }
  return out.str();
}

}  // namespace atise
