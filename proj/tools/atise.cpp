// atise: preprocess temporal fact files, train, evaluate and inspect models.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "atise/bundle_io.hpp"
#include "atise/checkpoint.hpp"
#include "atise/config.hpp"
#include "atise/container.hpp"
#include "atise/error.hpp"
#include "atise/evaluator.hpp"
#include "atise/trainer.hpp"

namespace fs = std::filesystem;
using namespace atise;

namespace {

struct Command {
  CLI::App* app = nullptr;
  unsigned mask = 0;
  std::string config_file;
  std::map<std::string, std::string> flags;
};

Command add_command(CLI::App& root, const std::string& name, const std::string& help, unsigned mask) {
  Command cmd;
  cmd.app = root.add_subcommand(name, help);
  cmd.mask = mask;
  return cmd;
}

// Every schema key used by the command becomes a --kebab-case flag.
void register_flags(Command& cmd) {
  cmd.app->add_option("--config", cmd.config_file, "key = value configuration file");
  for (const auto& spec : RunConfig::schema()) {
    if (!(spec.commands & cmd.mask)) continue;
    const std::string flag = "--" + RunConfig::flag_name(spec.name);
    std::string help(spec.help);
    help += " [default: " + std::string(spec.default_value) + "]";
    auto& slot = cmd.flags[std::string(spec.name)];
    if (spec.type == ValueType::kBool) {
      cmd.app->add_flag(flag + "{true}", slot, help);
    } else {
      cmd.app->add_option(flag, slot, help);
    }
  }
}

RunConfig resolve_config(const Command& cmd) {
  RunConfig config;
  std::string file = cmd.config_file;
  if (file.empty()) {
    if (const char* env = std::getenv("ATISE_CONFIG")) file = env;
  }
  if (!file.empty()) config.load_file(file);
  config.apply_env([](const char* name) { return static_cast<const char*>(std::getenv(name)); });
  for (const auto& [key, value] : cmd.flags) {
    const std::string flag = "--" + RunConfig::flag_name(key);
    if (cmd.app->count(flag) > 0) {
      try {
        config.set(key, value);
      } catch (const ConfigError& e) {
        throw ConfigError(flag + ": " + e.what());
      }
    }
  }
  return config;
}

std::string require(const RunConfig& config, const std::string& key) {
  const std::string& value = config.get(key);
  if (value.empty()) throw ConfigError("missing required --" + RunConfig::flag_name(key));
  return value;
}

fs::path bundle_path(const RunConfig& config) {
  const std::string& explicit_path = config.get("bundle");
  return explicit_path.empty() ? fs::path(config.get("out_dir")) / "bundle.bin" : fs::path(explicit_path);
}

std::vector<RawFact> read_facts(const fs::path& path, FileFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<RawFact> facts;
  try {
    facts = parse_fact_file(in, format);
  } catch (const ParseError& e) {
    throw e.with_source(path.string());
  }
  if (facts.empty()) throw DataError(path.string() + ": no facts");
  return facts;
}

int cmd_preprocess(const RunConfig& config) {
  const FileFormat format = config.get("format") == "interval" ? FileFormat::kInterval : FileFormat::kPoint;
  const fs::path train_file = require(config, "train_file");
  const fs::path valid_file = require(config, "valid_file");
  const fs::path test_file = require(config, "test_file");
  const auto train = read_facts(train_file, format);
  const auto valid = read_facts(valid_file, format);
  const auto test = read_facts(test_file, format);

  const TimelineOptions timeline = config.timeline_options();
  DatasetBundle bundle = make_bundle(train, valid, test, timeline, config.get_bool("reciprocal"));
  bundle.provenance.format = format;
  bundle.provenance.requested_bins = timeline.n_bins.value_or(0);
  bundle.provenance.sources = {{"train", train_file.string(), file_sha256_hex(train_file)},
                               {"valid", valid_file.string(), file_sha256_hex(valid_file)},
                               {"test", test_file.string(), file_sha256_hex(test_file)}};

  const fs::path out_dir = config.get("out_dir");
  fs::create_directories(out_dir);
  const std::string report = format_stats_report(dataset_stats(bundle));
  save_bundle(bundle, out_dir / "bundle.bin");
  write_file_atomic(out_dir / "stats.tsv", report);
  std::cout << report;
  return 0;
}

int cmd_train(RunConfig config) {
  const fs::path bundle_file = bundle_path(config);
  const DatasetBundle bundle = load_bundle(bundle_file);
  const ModelConfig model_config = model_config_for(bundle, config.model_config());
  TrainConfig train_config = config.train_config();
  train_config.reciprocal = bundle.vocab.reciprocal();
  model_config.validate();
  train_config.validate();

  std::string log = "epoch\tloss\tvalid_mrr\twall_seconds\n";
  std::cout << log << std::flush;
  const Checkpoint best = train(bundle, model_config, train_config, [&](const EpochReport& report) {
    const std::string line = format_log_line(report);
    log += line;
    std::cout << line << std::flush;
  });

  const fs::path out_dir = config.get("out_dir");
  fs::create_directories(out_dir);
  config.set("bundle", bundle_file.string());
  save_checkpoint(best, out_dir / "checkpoint.bin");
  write_file_atomic(out_dir / "train.log", log);
  write_file_atomic(out_dir / "config.txt", config.to_text(kTrainCmd));
  return 0;
}

int cmd_eval(const RunConfig& config) {
  const fs::path checkpoint_file = require(config, "checkpoint");
  const DatasetBundle bundle = load_bundle(bundle_path(config));
  const Checkpoint checkpoint = load_checkpoint(checkpoint_file);
  check_compatible(checkpoint, bundle);

  const FilterIndex index = build_filter_index(bundle);
  EvalOptions options;
  options.mode = config.get_bool("raw") ? FilterMode::kRaw : FilterMode::kFiltered;
  options.threads = static_cast<int>(config.get_int("threads"));
  const std::string dump = config.get("dump_ranks");
  options.keep_queries = !dump.empty();
  const Evaluation result =
      evaluate(checkpoint.params, bundle.split(parse_split(config.get("split"))), index, options);
  if (!dump.empty()) write_file_atomic(dump, format_rank_dump(result.queries, bundle.vocab));
  std::cout << format_metrics_report(result.metrics);
  return 0;
}

int cmd_inspect(const RunConfig& config) {
  const Checkpoint checkpoint = load_checkpoint(require(config, "checkpoint"));
  std::optional<DatasetBundle> bundle;
  if (!config.get("bundle").empty()) {
    bundle = load_bundle(config.get("bundle"));
    check_compatible(checkpoint, *bundle);
  }
  const EmbeddingTable& relations = checkpoint.params.relations;
  const auto d = static_cast<double>(relations.d);
  std::ostringstream out;
  out << "relation\tabs_alpha\tmean_abs_beta\tmean_abs_omega\n";
  for (std::int32_t p = 0; p < checkpoint.params.config.n_base_relations(); ++p) {
    double beta = 0.0;
    double omega = 0.0;
    for (const double v : relations.row(Family::kAmplitude, p)) beta += std::abs(v);
    for (const double v : relations.row(Family::kFrequency, p)) omega += std::abs(v);
    const std::string label = bundle ? bundle->vocab.relation_label(p) : "r" + std::to_string(p);
    char line[128];
    std::snprintf(line, sizeof line, "\t%.6f\t%.6f\t%.6f\n", std::abs(relations.alpha[static_cast<std::size_t>(p)]),
                  beta / d, omega / d);
    out << label << line;
  }
  std::cout << out.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ATiSE temporal knowledge graph embeddings"};
  app.require_subcommand(1);
  Command preprocess = add_command(app, "preprocess", "parse fact files into a dataset bundle", kPreprocessCmd);
  Command train_cmd = add_command(app, "train", "train a model on a bundle", kTrainCmd);
  Command eval = add_command(app, "eval", "link prediction metrics for a checkpoint", kEvalCmd);
  Command inspect = add_command(app, "inspect", "per-relation trend and seasonal magnitudes", kInspectCmd);
  for (Command* cmd : {&preprocess, &train_cmd, &eval, &inspect}) register_flags(*cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*preprocess.app) return cmd_preprocess(resolve_config(preprocess));
    if (*train_cmd.app) return cmd_train(resolve_config(train_cmd));
    if (*eval.app) return cmd_eval(resolve_config(eval));
    if (*inspect.app) return cmd_inspect(resolve_config(inspect));
  } catch (const std::exception& e) {
    std::cerr << "atise: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
