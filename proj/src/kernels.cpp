#include "atise/kernels.hpp"

#include <omp.h>

#include <cmath>

#include "atise/error.hpp"

namespace atise {

int resolve_threads(int requested) { return requested >= 1 ? requested : omp_get_max_threads(); }

namespace kernels {
namespace {

std::size_t negatives_per_positive(std::span<const Quadruple> positives, std::span<const Quadruple> negatives) {
  if (positives.empty()) return 0;
  if (negatives.size() % positives.size() != 0) {
    throw Error("negatives must be grouped with the same count per positive");
  }
  return negatives.size() / positives.size();
}

// Loss and gradient contribution of one positive and its negatives.
double positive_term(const ModelParams& params, const Quadruple& pos, std::span<const Quadruple> negs, double gamma,
                     double adv_temp, std::vector<double>& neg_scores, GradRecord& record) {
  const double f_pos = score(params, pos);
  double loss = neg_log_sigmoid(gamma - f_pos);
  accumulate_score_grad(params, pos, sigmoid(f_pos - gamma), record);
  if (negs.empty()) return loss;

  neg_scores.resize(negs.size());
  for (std::size_t j = 0; j < negs.size(); ++j) neg_scores[j] = score(params, negs[j]);
  const auto weights = adversarial_weights(neg_scores, adv_temp);
  for (std::size_t j = 0; j < negs.size(); ++j) {
    loss += weights[j] * neg_log_sigmoid(neg_scores[j] - gamma);
    accumulate_score_grad(params, negs[j], -weights[j] * sigmoid(gamma - neg_scores[j]), record);
  }
  return loss;
}

}  // namespace

void score_candidates_serial(const ModelParams& params, const IntervalFact& fact, Side side,
                             std::span<double> out) {
  for (std::int32_t x = 0; x < params.config.n_entities; ++x) {
    IntervalFact candidate = fact;
    (side == Side::kSubject ? candidate.s : candidate.o) = x;
    out[static_cast<std::size_t>(x)] = interval_score(params, candidate);
  }
}

void score_candidates_parallel(const ModelParams& params, const IntervalFact& fact, Side side,
                               std::span<double> out, int threads) {
  const ModelConfig& config = params.config;
  const auto d = static_cast<std::size_t>(config.d);
  const Variant variant = config.variant;
  const bool translation = variant == Variant::kTS;
  const std::int32_t n_steps = fact.length();
  const std::int32_t fixed = side == Side::kSubject ? fact.o : fact.s;

  // Per step, the candidate enters as delta = sign * mean_x + offset.
  //   KL, subject:  mean_x - mean_o - mean_r       KL, object:  mean_s - mean_x - mean_r
  //   TS, subject:  mean_x + mean_r - mean_o       TS, object:  mean_s + mean_r - mean_x
  const double sign = side == Side::kSubject ? 1.0 : -1.0;
  std::vector<double> offsets(static_cast<std::size_t>(n_steps) * d);
  std::vector<double> mean_f(d), mean_r(d);
  for (std::int32_t j = 0; j < n_steps; ++j) {
    const NormalizedTime t = NormalizedTime::from_step(fact.t_start + j, config.n_steps);
    mean_at(params.entities, fixed, t, variant, mean_f);
    mean_at(params.relations, fact.p, t, variant, mean_r);
    double* off = &offsets[static_cast<std::size_t>(j) * d];
    for (std::size_t k = 0; k < d; ++k) {
      if (translation) {
        off[k] = side == Side::kSubject ? mean_r[k] - mean_f[k] : mean_f[k] + mean_r[k];
      } else {
        off[k] = side == Side::kSubject ? -mean_f[k] - mean_r[k] : mean_f[k] - mean_r[k];
      }
    }
  }
  const auto sigma_f = params.entities.row(Family::kVariance, fixed);
  const auto sigma_r = params.relations.row(Family::kVariance, fact.p);

#pragma omp parallel num_threads(resolve_threads(threads))
  {
    std::vector<double> mean_x(d);
#pragma omp for schedule(static)
    for (std::int32_t x = 0; x < config.n_entities; ++x) {
      const auto sigma_x = params.entities.row(Family::kVariance, x);
      double total = 0.0;
      for (std::int32_t j = 0; j < n_steps; ++j) {
        mean_at(params.entities, x, NormalizedTime::from_step(fact.t_start + j, config.n_steps), variant, mean_x);
        const double* off = &offsets[static_cast<std::size_t>(j) * d];
        double step = 0.0;
        if (translation) {
          for (std::size_t k = 0; k < d; ++k) {
            const double v = sign * mean_x[k] + off[k];
            step += v * v;
          }
          step = std::sqrt(step);
        } else {
          for (std::size_t k = 0; k < d; ++k) {
            const double delta = sign * mean_x[k] + off[k];
            const double a = sigma_x[k] + sigma_f[k];
            const double b = sigma_r[k];
            step += 0.25 * ((a - b) * (a - b) / (a * b) + delta * delta * (1.0 / a + 1.0 / b));
          }
        }
        total += step;
      }
      out[static_cast<std::size_t>(x)] = total;
    }
  }
}

BatchLoss batch_loss_serial(const ModelParams& params, std::span<const Quadruple> positives,
                            std::span<const Quadruple> negatives, double gamma, double adv_temp) {
  const std::size_t eta = negatives_per_positive(positives, negatives);
  BatchLoss result;
  result.grad = GradRecord(params.config.d, params.config.variant);
  std::vector<double> neg_scores;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    result.loss += positive_term(params, positives[i], negatives.subspan(i * eta, eta), gamma, adv_temp, neg_scores,
                                 result.grad);
  }
  return result;
}

BatchLoss batch_loss_parallel(const ModelParams& params, std::span<const Quadruple> positives,
                              std::span<const Quadruple> negatives, double gamma, double adv_temp, int threads) {
  const std::size_t eta = negatives_per_positive(positives, negatives);
  const int n_threads = resolve_threads(threads);
  std::vector<GradRecord> partial_grads(static_cast<std::size_t>(n_threads),
                                        GradRecord(params.config.d, params.config.variant));
  std::vector<double> partial_loss(static_cast<std::size_t>(n_threads), 0.0);
  const auto n = static_cast<std::int64_t>(positives.size());

#pragma omp parallel num_threads(n_threads)
  {
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
    std::vector<double> neg_scores;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      partial_loss[tid] += positive_term(params, positives[u], negatives.subspan(u * eta, eta), gamma, adv_temp,
                                         neg_scores, partial_grads[tid]);
    }
  }

  BatchLoss result;
  result.grad = std::move(partial_grads[0]);
  result.loss = partial_loss[0];
  for (std::size_t k = 1; k < partial_grads.size(); ++k) {
    result.grad.add(partial_grads[k]);
    result.loss += partial_loss[k];
  }
  return result;
}

}  // namespace kernels
}  // namespace atise
