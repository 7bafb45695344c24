#pragma once

// Negative-sampling loss with self-adversarial weighting:
//
//   L = sum_pos [ -log sigmoid(gamma - f(pos)) - sum_j w_j log sigmoid(f(neg_j) - gamma) ]
//
// w_j = softmax(-adv_temp * f(neg_j)) over the negatives of one positive; the
// weights are treated as constants when differentiating.

#include <span>
#include <vector>

#include "atise/gradient.hpp"

namespace atise {

// Numerically stable log(1 + exp(-x)) = -log sigmoid(x).
double neg_log_sigmoid(double x);
double sigmoid(double x);

std::vector<double> adversarial_weights(std::span<const double> neg_scores, double adv_temp);

struct BatchLoss {
  double loss = 0.0;
  GradRecord grad;
};

// `negatives` holds eta entries per positive, grouped in positive order.
// threads == 1 runs the serial reference; otherwise per-thread gradient
// records are merged in thread order.
BatchLoss batch_loss(const ModelParams& params, std::span<const Quadruple> positives,
                     std::span<const Quadruple> negatives, double gamma, double adv_temp, int threads = 1);

}  // namespace atise
