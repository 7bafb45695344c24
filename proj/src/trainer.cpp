#include "atise/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "atise/bundle_io.hpp"
#include "atise/error.hpp"
#include "atise/kernels.hpp"

namespace atise {
namespace {

std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return std::mt19937_64(seq);
}

void adam_update_table(EmbeddingTable& table, EmbeddingTable& m, EmbeddingTable& v,
                       const std::map<std::int32_t, RowGrad>& rows, const AdamState& state, double lr) {
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (const auto& [i, grad] : rows) {
    for (const Family f : kAllFamilies) {
      if (!grad.has(f)) continue;
      const auto g = grad.values(f);
      auto x = table.row(f, i);
      auto m1 = m.row(f, i);
      auto m2 = v.row(f, i);
      for (std::size_t k = 0; k < g.size(); ++k) {
        m1[k] = state.beta1 * m1[k] + (1.0 - state.beta1) * g[k];
        m2[k] = state.beta2 * m2[k] + (1.0 - state.beta2) * g[k] * g[k];
        x[k] -= lr * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + state.epsilon);
      }
    }
  }
}

std::vector<std::int32_t> touched_rows(const std::map<std::int32_t, RowGrad>& rows) {
  std::vector<std::int32_t> out;
  out.reserve(rows.size());
  for (const auto& entry : rows) out.push_back(entry.first);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (eta < 1) throw ConfigError("eta must be >= 1");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (!(adv_temp >= 0.0)) throw ConfigError("adv_temp must be >= 0");
  if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
}

RngStreams RngStreams::from_seed(std::uint64_t seed) {
  return RngStreams{make_stream(seed, 1), make_stream(seed, 2), make_stream(seed, 3)};
}

std::string RngStreams::serialize() const {
  std::ostringstream out;
  out << init << ' ' << sampling << ' ' << shuffle;
  return out.str();
}

RngStreams RngStreams::deserialize(const std::string& text) {
  std::istringstream in(text);
  RngStreams r;
  in >> r.init >> r.sampling >> r.shuffle;
  if (!in) throw CorruptionError("malformed random generator state");
  return r;
}

AdamState AdamState::zeros_like(const ModelParams& params) {
  AdamState state;
  const auto& c = params.config;
  state.m_entities = state.v_entities = EmbeddingTable(c.n_entities, c.d);
  state.m_relations = state.v_relations = EmbeddingTable(c.n_relations, c.d);
  return state;
}

double neg_log_sigmoid(double x) { return x >= 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> adversarial_weights(std::span<const double> neg_scores, double adv_temp) {
  std::vector<double> weights(neg_scores.size());
  if (neg_scores.empty()) return weights;
  // Softmax of -adv_temp * score, shifted by the best (lowest) score.
  const double lowest = *std::min_element(neg_scores.begin(), neg_scores.end());
  double total = 0.0;
  for (std::size_t j = 0; j < neg_scores.size(); ++j) {
    weights[j] = std::exp(-adv_temp * (neg_scores[j] - lowest));
    total += weights[j];
  }
  for (auto& w : weights) w /= total;
  return weights;
}

BatchLoss batch_loss(const ModelParams& params, std::span<const Quadruple> positives,
                     std::span<const Quadruple> negatives, double gamma, double adv_temp, int threads) {
  if (threads == 1) return kernels::batch_loss_serial(params, positives, negatives, gamma, adv_temp);
  return kernels::batch_loss_parallel(params, positives, negatives, gamma, adv_temp, threads);
}

DatasetBundle add_reciprocal(const DatasetBundle& bundle) {
  if (!bundle.vocab.reciprocal()) throw DataError("vocabulary was not built for reciprocal relations");
  const std::int32_t n_r = bundle.vocab.n_relations();
  DatasetBundle out = bundle;
  for (auto* split : {&out.train, &out.valid, &out.test}) {
    const std::size_t n = split->size();
    split->reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const IntervalFact f = (*split)[i];
      if (f.p >= n_r) throw DataError("bundle already contains inverse relations");
      split->push_back({f.o, f.p + n_r, f.s, f.t_start, f.t_end});
    }
  }
  return out;
}

std::vector<Quadruple> sample_negatives(std::span<const Quadruple> batch, std::int32_t eta, std::int32_t n_entities,
                                        std::mt19937_64& rng) {
  std::bernoulli_distribution corrupt_subject(0.5);
  std::uniform_int_distribution<std::int32_t> entity(0, n_entities - 1);
  std::vector<Quadruple> out;
  out.reserve(batch.size() * static_cast<std::size_t>(eta));
  for (const auto& q : batch) {
    for (std::int32_t j = 0; j < eta; ++j) {
      Quadruple neg = q;
      if (corrupt_subject(rng)) {
        neg.s = entity(rng);
      } else {
        neg.o = entity(rng);
      }
      out.push_back(neg);
    }
  }
  return out;
}

void adam_step(ModelParams& params, const GradRecord& grad, AdamState& state, double lr) {
  ++state.step;
  adam_update_table(params.entities, state.m_entities, state.v_entities, grad.entities, state, lr);
  adam_update_table(params.relations, state.m_relations, state.v_relations, grad.relations, state, lr);
}

ModelConfig model_config_for(const DatasetBundle& bundle, ModelConfig base) {
  base.n_entities = bundle.vocab.n_entities();
  base.n_relations = bundle.vocab.relation_space();
  base.n_steps = bundle.vocab.timeline().n_steps;
  base.reciprocal = bundle.vocab.reciprocal();
  return base;
}

Trainer::Trainer(const DatasetBundle& bundle, const ModelConfig& model_config, const TrainConfig& train_config)
    : bundle_(&bundle), config_(train_config) {
  config_.validate();
  if (config_.reciprocal != bundle.vocab.reciprocal()) {
    throw ConfigError("reciprocal training requires a bundle preprocessed with reciprocal = true (and vice versa)");
  }
  if (bundle.train.empty()) throw ConfigError("training split is empty");
  rng_ = RngStreams::from_seed(config_.seed);
  params_ = init_params(model_config_for(bundle, model_config), rng_.init);
  reinitialized_ += project_constraints(params_, rng_.init).reinitialized;
  adam_ = AdamState::zeros_like(params_);
  train_quads_ = expand_all(config_.reciprocal ? add_reciprocal(bundle).train : bundle.train);
  vocab_digest_ = vocabulary_digest(bundle.vocab);
  filter_ = build_filter_index(bundle);
}

Trainer::Trainer(const DatasetBundle& bundle, Checkpoint state)
    : bundle_(&bundle),
      params_(std::move(state.params)),
      config_(state.train_config),
      adam_(std::move(state.adam)),
      rng_(std::move(state.rng)),
      epoch_(state.epoch),
      best_valid_mrr_(state.best_valid_mrr),
      stale_validations_(state.stale_validations),
      vocab_digest_(std::move(state.vocab_digest)) {
  config_.validate();
  if (vocab_digest_ != vocabulary_digest(bundle.vocab)) {
    throw ShapeMismatchError("checkpoint was trained on a different vocabulary");
  }
  if (model_config_for(bundle, params_.config) != params_.config) {
    throw ShapeMismatchError("checkpoint model shape does not match the bundle");
  }
  if (bundle.train.empty()) throw ConfigError("training split is empty");
  train_quads_ = expand_all(config_.reciprocal ? add_reciprocal(bundle).train : bundle.train);
  filter_ = build_filter_index(bundle);
}

void Trainer::run_iteration(std::span<const Quadruple> batch) {
  const auto negatives = sample_negatives(batch, config_.eta, params_.config.n_entities, rng_.sampling);
  const BatchLoss result = batch_loss(params_, batch, negatives, config_.gamma, config_.adv_temp, config_.threads);
  adam_step(params_, result.grad, adam_, config_.lr);
  // Untouched rows already satisfy the constraints, so only touched rows are
  // renormalized and clamped.
  reinitialized_ += project_rows(params_, touched_rows(result.grad.entities), touched_rows(result.grad.relations),
                                 rng_.init)
                        .reinitialized;
  ++iterations_;
  last_loss_ = result.loss;
}

double Trainer::run_epoch() {
  // The permutation is drawn from the canonical order every epoch so that a
  // resumed run sees the same batches as an uninterrupted one.
  std::vector<std::size_t> order(train_quads_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng_.shuffle);

  const auto b = static_cast<std::size_t>(config_.batch_size);
  std::vector<Quadruple> batch;
  double total = 0.0;
  for (std::size_t start = 0; start < order.size(); start += b) {
    const std::size_t end = std::min(order.size(), start + b);
    batch.clear();
    for (std::size_t i = start; i < end; ++i) batch.push_back(train_quads_[order[i]]);
    run_iteration(batch);
    total += last_loss_;
  }
  ++epoch_;
  return total / static_cast<double>(order.size());
}

double Trainer::validate() const {
  EvalOptions options;
  options.threads = config_.threads;
  return evaluate(params_, bundle_->valid, filter_, options).metrics.mrr;
}

Checkpoint Trainer::state() const {
  Checkpoint c;
  c.params = params_;
  c.train_config = config_;
  c.adam = adam_;
  c.epoch = epoch_;
  c.best_valid_mrr = best_valid_mrr_;
  c.stale_validations = stale_validations_;
  c.rng = rng_;
  c.vocab_digest = vocab_digest_;
  return c;
}

Checkpoint Trainer::fit(const std::function<void(const EpochReport&)>& on_validation) {
  const auto started = std::chrono::steady_clock::now();
  const bool can_validate = !bundle_->valid.empty();
  Checkpoint best = state();
  while (epoch_ < config_.max_epochs) {
    const double loss = run_epoch();
    const bool due = epoch_ % config_.eval_every == 0 || epoch_ == config_.max_epochs;
    if (!can_validate) {
      best = state();
      continue;
    }
    if (!due) continue;
    EpochReport report;
    report.epoch = epoch_;
    report.loss = loss;
    report.valid_mrr = validate();
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (*report.valid_mrr > best_valid_mrr_) {
      best_valid_mrr_ = *report.valid_mrr;
      stale_validations_ = 0;
      best = state();
    } else {
      ++stale_validations_;
    }
    if (on_validation) on_validation(report);
    if (stale_validations_ >= config_.patience) break;
  }
  return best;
}

Checkpoint train(const DatasetBundle& bundle, const ModelConfig& model_config, const TrainConfig& train_config,
                 const std::function<void(const EpochReport&)>& on_validation) {
  Trainer trainer(bundle, model_config, train_config);
  return trainer.fit(on_validation);
}

std::string format_log_line(const EpochReport& report) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%lld\t%.6f\t%.6f\t%.3f\n", static_cast<long long>(report.epoch), report.loss,
                report.valid_mrr.value_or(0.0), report.wall_seconds);
  return buf;
}

}  // namespace atise
