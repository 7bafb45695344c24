#pragma once

// Gaussian embeddings whose means evolve as additive time series:
//
//   mean_i(t) = base_i + alpha_i * w_i * t + beta_i (.) sin(2 pi omega_i t)
//
// with a diagonal covariance sigma_i that carries the noise component. A
// fact (s, p, o, t) is scored by comparing N(mean_s - mean_o, sigma_s + sigma_o)
// with N(mean_p, sigma_p); lower scores are more plausible.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "atise/data.hpp"

namespace atise {

// FULL: trend + seasonal + noise. SN drops the trend, TN drops the seasonal
// component, TS drops the noise and scores with a translational L2 norm.
enum class Variant : std::uint8_t { kFull = 0, kSN = 1, kTN = 2, kTS = 3 };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

inline bool has_trend(Variant v) { return v != Variant::kSN; }
inline bool has_seasonal(Variant v) { return v != Variant::kTN; }
inline bool has_noise(Variant v) { return v != Variant::kTS; }

struct ModelConfig {
  std::int32_t d = 500;
  Variant variant = Variant::kFull;
  double c_min = 0.005;
  double c_max = 0.5;
  std::int32_t n_entities = 0;
  // Size of the relation table, including inverse relations when reciprocal.
  std::int32_t n_relations = 0;
  std::int32_t n_steps = 1;
  bool reciprocal = false;

  // Throws ConfigError.
  void validate() const;
  std::int32_t n_base_relations() const { return reciprocal ? n_relations / 2 : n_relations; }
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Step index scaled into [0, 1).
struct NormalizedTime {
  double value = 0.0;

  static NormalizedTime from_step(std::int32_t step, std::int32_t n_steps) {
    return {static_cast<double>(step) / static_cast<double>(n_steps)};
  }
};

enum class Family : std::uint8_t { kBase, kTrendRate, kTrendDirection, kAmplitude, kFrequency, kVariance };
inline constexpr Family kAllFamilies[] = {Family::kBase,      Family::kTrendRate, Family::kTrendDirection,
                                          Family::kAmplitude, Family::kFrequency, Family::kVariance};
std::string_view family_name(Family f);

// Row-major parameter tables for one kind of object (entities or relations).
// `alpha` has one scalar per row, every other family d values per row.
struct EmbeddingTable {
  std::int32_t rows = 0;
  std::int32_t d = 0;
  std::vector<double> base;
  std::vector<double> alpha;
  std::vector<double> w;
  std::vector<double> beta;
  std::vector<double> omega;
  std::vector<double> sigma;

  EmbeddingTable() = default;
  EmbeddingTable(std::int32_t rows, std::int32_t d);

  static std::int32_t width(Family f, std::int32_t d) { return f == Family::kTrendRate ? 1 : d; }
  std::vector<double>& family(Family f);
  const std::vector<double>& family(Family f) const;
  std::span<double> row(Family f, std::int32_t i);
  std::span<const double> row(Family f, std::int32_t i) const;

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

struct ModelParams {
  ModelConfig config;
  EmbeddingTable entities;
  EmbeddingTable relations;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct GaussianEmbed {
  std::vector<double> mean;
  std::vector<double> var;
};

// Writes the time-specific mean of row `i` into `out` (size d).
void mean_at(const EmbeddingTable& table, std::int32_t i, NormalizedTime t, Variant variant, std::span<double> out);

std::vector<double> entity_mean_at(const ModelParams& params, std::int32_t i, NormalizedTime t, Variant variant);
std::vector<double> relation_mean_at(const ModelParams& params, std::int32_t p, NormalizedTime t, Variant variant);

NormalizedTime time_of(const ModelParams& params, const Quadruple& q);

// P_e = N(mean_s - mean_o, sigma_s + sigma_o) and P_r = N(mean_p, sigma_p).
GaussianEmbed entity_transform_at(const ModelParams& params, const Quadruple& q);
GaussianEmbed relation_embed_at(const ModelParams& params, const Quadruple& q);

// Diagonal closed forms over raw moment spans, all of equal length.
double diag_kl(std::span<const double> mean_p, std::span<const double> var_p, std::span<const double> mean_q,
               std::span<const double> var_q);
double diag_sym_kl(std::span<const double> mean_p, std::span<const double> var_p, std::span<const double> mean_q,
                   std::span<const double> var_q);

// KL(p || q) for diagonal Gaussians.
double kl_divergence(const GaussianEmbed& p, const GaussianEmbed& q);

// KL(P_e || P_r): trace + quadratic - log-det ratio - d, halved.
double kl_score(const ModelParams& params, const Quadruple& q);
// Mean of KL(P_e || P_r) and KL(P_r || P_e); the log-determinants cancel.
double sym_kl_score(const ModelParams& params, const Quadruple& q);
// || mean_s + mean_p - mean_o ||_2 with trend + seasonal means.
double ts_score(const ModelParams& params, const Quadruple& q);

// The variant's training score: symmetric KL, or the translational norm for TS.
double score(const ModelParams& params, const Quadruple& q);
// Sum of per-step scores over [t_start, t_end].
double interval_score(const ModelParams& params, const IntervalFact& f);

ModelParams init_params(const ModelConfig& config, std::mt19937_64& rng);
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

struct ProjectionReport {
  // Zero-norm vectors that had to be redrawn from the init distribution.
  std::int64_t reinitialized = 0;
};

// Unit-normalizes base and trend-direction rows and clamps variances into
// [c_min, c_max]. `rng` is only used to redraw zero-norm vectors.
ProjectionReport project_constraints(ModelParams& params, std::mt19937_64& rng);
// Same, restricted to the given rows.
ProjectionReport project_rows(ModelParams& params, std::span<const std::int32_t> entity_rows,
                              std::span<const std::int32_t> relation_rows, std::mt19937_64& rng);

}  // namespace atise
