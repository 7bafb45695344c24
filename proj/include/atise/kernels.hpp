#pragma once

// Hot loops of training and evaluation. Each kernel has a plain serial
// reference next to its OpenMP version; tests check them against each other
// and bench/bench_kernels.cpp times them.

#include <span>

#include "atise/loss.hpp"
#include "atise/model.hpp"

namespace atise {

enum class Side : std::uint8_t { kSubject, kObject };

// Resolves a thread count request: values < 1 mean "OpenMP default".
int resolve_threads(int requested);

namespace kernels {

// out[x] = interval_score of `fact` with the `side` entity replaced by x, for
// every entity x. `out` has n_entities entries.
void score_candidates_serial(const ModelParams& params, const IntervalFact& fact, Side side,
                             std::span<double> out);
void score_candidates_parallel(const ModelParams& params, const IntervalFact& fact, Side side,
                               std::span<double> out, int threads);

BatchLoss batch_loss_serial(const ModelParams& params, std::span<const Quadruple> positives,
                            std::span<const Quadruple> negatives, double gamma, double adv_temp);
BatchLoss batch_loss_parallel(const ModelParams& params, std::span<const Quadruple> positives,
                              std::span<const Quadruple> negatives, double gamma, double adv_temp, int threads);

}  // namespace kernels
}  // namespace atise
