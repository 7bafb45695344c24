#pragma once

// Fixtures and independent oracles shared by the unit and acceptance tests.
// Nothing here calls into the closed forms under test.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <random>
#include <vector>

#include "atise/data.hpp"
#include "atise/evaluator.hpp"
#include "atise/gradient.hpp"
#include "atise/model.hpp"

namespace atise::testing {

struct ToyOptions {
  std::int32_t entities = 50;
  std::int32_t relations = 5;
  std::int32_t steps = 10;
  std::int32_t facts = 500;
  std::int32_t planted_d = 16;
  std::uint64_t seed = 2024;
};

// Point facts dated 2014-01-01 + step, with the object chosen as the best
// match for (subject, relation, step) under a randomly planted model. Every
// step occurs at least once, so the day timeline has exactly `steps` steps.
std::vector<RawFact> toy_facts(const ToyOptions& options = {});

// Train, valid and test all hold the same facts.
DatasetBundle toy_bundle(const ToyOptions& options = {}, bool reciprocal = false);

// 8 entities, 3 relations and 5 year bins with overlapping interval facts,
// so that the time-wise filter removes some competitors at some steps only.
DatasetBundle ranking_fixture(bool reciprocal);

// Parameters with every family drawn at random (trend and seasonal terms
// included), variances inside [c_min, c_max].
ModelParams random_params(const ModelConfig& config, std::mt19937_64& rng);

// KL(N(m0, S0) || N(m1, S1)) for dense covariance matrices (row-major d x d),
// via Gauss-Jordan inversion and LU determinants.
double dense_gaussian_kl(const std::vector<double>& m0, const std::vector<double>& s0, const std::vector<double>& m1,
                         const std::vector<double>& s1);

// 1-D KL(N(m0, v0) || N(m1, v1)) by composite Simpson integration of p log(p/q).
double numeric_kl_1d(double m0, double v0, double m1, double v1);

// Ranks by exhaustive enumeration with a quadruple set as the filter. For a
// reciprocal model, subject queries use the inverse relation.
std::int64_t brute_force_rank(const ModelParams& params, const DatasetBundle& bundle, const IntervalFact& fact,
                              Side side, FilterMode mode);

// Relative error ||analytic - numeric|| / max(||analytic||, ||numeric||) over
// every parameter entry, with central differences of step `h` applied to `f`.
double gradient_check(const ModelParams& params, const GradRecord& analytic,
                      const std::function<double(const ModelParams&)>& f, double h = 1e-5);

// The training loss with the self-adversarial weights frozen at their values
// under `weights_from`, written out from the scores alone.
double frozen_weight_loss(const ModelParams& params, const ModelParams& weights_from,
                          std::span<const Quadruple> positives, std::span<const Quadruple> negatives, double gamma,
                          double adv_temp);

// A fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace atise::testing
