#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "atise/data.hpp"
#include "atise/evaluator.hpp"
#include "atise/gradient.hpp"
#include "atise/loss.hpp"
#include "atise/model.hpp"

namespace atise {

struct TrainConfig {
  double lr = 3e-5;
  std::int32_t batch_size = 512;
  std::int32_t eta = 10;
  double gamma = 1.0;
  double adv_temp = 1.0;
  std::int32_t max_epochs = 5000;
  // Validations without an MRR improvement before stopping.
  std::int32_t patience = 20;
  std::int32_t eval_every = 25;
  std::uint64_t seed = 0;
  bool reciprocal = false;
  // 1 is bitwise reproducible; anything else uses OpenMP kernels.
  std::int32_t threads = 1;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Independent random streams derived from one seed.
struct RngStreams {
  std::mt19937_64 init;
  std::mt19937_64 sampling;
  std::mt19937_64 shuffle;

  static RngStreams from_seed(std::uint64_t seed);
  std::string serialize() const;
  static RngStreams deserialize(const std::string& text);
  friend bool operator==(const RngStreams&, const RngStreams&) = default;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  // First and second moments, shaped like the parameter tables.
  EmbeddingTable m_entities, v_entities, m_relations, v_relations;

  static AdamState zeros_like(const ModelParams& params);
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

struct Checkpoint {
  ModelParams params;
  TrainConfig train_config;
  AdamState adam;
  std::int64_t epoch = 0;
  double best_valid_mrr = 0.0;
  std::int32_t stale_validations = 0;
  RngStreams rng;
  std::string vocab_digest;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// Adds (o, p + n_r, s, [ts, te]) for every fact of every split. The
// vocabulary must have been built with the reciprocal flag.
DatasetBundle add_reciprocal(const DatasetBundle& bundle);

// eta corruptions per positive, grouped in positive order. Each replaces the
// subject or the object (50/50) with a uniformly drawn entity.
std::vector<Quadruple> sample_negatives(std::span<const Quadruple> batch, std::int32_t eta, std::int32_t n_entities,
                                        std::mt19937_64& rng);

// Sparse Adam with bias correction: only entries present in `grad` move.
void adam_step(ModelParams& params, const GradRecord& grad, AdamState& state, double lr);

ModelConfig model_config_for(const DatasetBundle& bundle, ModelConfig base);

struct EpochReport {
  std::int64_t epoch = 0;
  double loss = 0.0;  // mean loss per positive quadruple
  std::optional<double> valid_mrr;
  double wall_seconds = 0.0;
};

// Drives training one epoch at a time; state() can be saved and resumed.
class Trainer {
 public:
  Trainer(const DatasetBundle& bundle, const ModelConfig& model_config, const TrainConfig& train_config);
  // Resumes from a saved state; the bundle must match the checkpoint's vocabulary.
  Trainer(const DatasetBundle& bundle, Checkpoint state);

  // One pass over the shuffled training quadruples. Returns the mean loss.
  double run_epoch();
  // Filtered MRR of the current parameters on the validation split.
  double validate() const;

  // Runs until max_epochs or early stopping; returns the best checkpoint.
  Checkpoint fit(const std::function<void(const EpochReport&)>& on_validation = {});

  Checkpoint state() const;
  const ModelParams& params() const { return params_; }
  std::int64_t epoch() const { return epoch_; }
  std::int64_t iterations() const { return iterations_; }
  std::int64_t reinitialized_vectors() const { return reinitialized_; }

 private:
  void run_iteration(std::span<const Quadruple> batch);

  const DatasetBundle* bundle_;
  std::vector<Quadruple> train_quads_;
  ModelParams params_;
  TrainConfig config_;
  AdamState adam_;
  RngStreams rng_;
  std::int64_t epoch_ = 0;
  std::int64_t iterations_ = 0;
  std::int64_t reinitialized_ = 0;
  double best_valid_mrr_ = 0.0;
  std::int32_t stale_validations_ = 0;
  double last_loss_ = 0.0;
  std::string vocab_digest_;
  FilterIndex filter_;
};

Checkpoint train(const DatasetBundle& bundle, const ModelConfig& model_config, const TrainConfig& train_config,
                 const std::function<void(const EpochReport&)>& on_validation = {});

std::string format_log_line(const EpochReport& report);

}  // namespace atise
