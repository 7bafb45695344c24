#include "atise/model.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "atise/error.hpp"

namespace atise {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Rows whose norm is already this close to 1 are left untouched so that
// projection is idempotent to the bit.
constexpr double kUnitNormSlack = 1e-12;

void draw_unit(std::span<double> row, std::int32_t d, std::mt19937_64& rng) {
  const double bound = 6.0 / std::sqrt(static_cast<double>(d));
  std::uniform_real_distribution<double> dist(-bound, bound);
  double norm = 0.0;
  do {
    for (auto& x : row) x = dist(rng);
    norm = 0.0;
    for (double x : row) norm += x * x;
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& x : row) x /= norm;
}

// Returns true when the row had to be redrawn.
bool normalize_row(std::span<double> row, std::int32_t d, std::mt19937_64& rng) {
  double norm = 0.0;
  for (double x : row) norm += x * x;
  norm = std::sqrt(norm);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    draw_unit(row, d, rng);
    return true;
  }
  if (std::abs(norm - 1.0) <= kUnitNormSlack) return false;
  for (auto& x : row) x /= norm;
  return false;
}

void clamp_row(std::span<double> row, double lo, double hi) {
  for (auto& x : row) x = std::max(lo, std::min(hi, x));
}

void init_table(EmbeddingTable& table, const ModelConfig& config, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> cov(config.c_min, config.c_max);
  for (std::int32_t i = 0; i < table.rows; ++i) draw_unit(table.row(Family::kBase, i), config.d, rng);
  for (std::int32_t i = 0; i < table.rows; ++i) draw_unit(table.row(Family::kTrendDirection, i), config.d, rng);
  for (auto& x : table.sigma) x = cov(rng);
  for (auto& x : table.omega) x = cov(rng);
  // alpha and beta start at zero.
}

ProjectionReport project_table_rows(EmbeddingTable& table, const ModelConfig& config,
                                    std::span<const std::int32_t> rows, std::mt19937_64& rng) {
  ProjectionReport report;
  for (std::int32_t i : rows) {
    report.reinitialized += normalize_row(table.row(Family::kBase, i), config.d, rng);
    report.reinitialized += normalize_row(table.row(Family::kTrendDirection, i), config.d, rng);
    clamp_row(table.row(Family::kVariance, i), config.c_min, config.c_max);
  }
  return report;
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kSN: return "sn";
    case Variant::kTN: return "tn";
    case Variant::kTS: return "ts";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  if (name == "full") return Variant::kFull;
  if (name == "sn") return Variant::kSN;
  if (name == "tn") return Variant::kTN;
  if (name == "ts") return Variant::kTS;
  throw ConfigError("unknown variant '" + std::string(name) + "' (expected full, sn, tn or ts)");
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kBase: return "base";
    case Family::kTrendRate: return "alpha";
    case Family::kTrendDirection: return "w";
    case Family::kAmplitude: return "beta";
    case Family::kFrequency: return "omega";
    case Family::kVariance: return "sigma";
  }
  return "?";
}

void ModelConfig::validate() const {
  if (d < 1) throw ConfigError("d must be >= 1");
  if (!(c_min > 0.0) || !(c_min < c_max)) throw ConfigError("covariance bounds must satisfy 0 < c_min < c_max");
  if (n_entities < 1) throw ConfigError("model needs at least one entity");
  if (n_relations < 1) throw ConfigError("model needs at least one relation");
  if (reciprocal && n_relations % 2 != 0) throw ConfigError("reciprocal relation table must have even size");
  if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
}

EmbeddingTable::EmbeddingTable(std::int32_t rows_, std::int32_t d_) : rows(rows_), d(d_) {
  const auto n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(d);
  base.assign(n, 0.0);
  alpha.assign(static_cast<std::size_t>(rows), 0.0);
  w.assign(n, 0.0);
  beta.assign(n, 0.0);
  omega.assign(n, 0.0);
  sigma.assign(n, 0.0);
}

std::vector<double>& EmbeddingTable::family(Family f) {
  return const_cast<std::vector<double>&>(std::as_const(*this).family(f));
}

const std::vector<double>& EmbeddingTable::family(Family f) const {
  switch (f) {
    case Family::kBase: return base;
    case Family::kTrendRate: return alpha;
    case Family::kTrendDirection: return w;
    case Family::kAmplitude: return beta;
    case Family::kFrequency: return omega;
    case Family::kVariance: return sigma;
  }
  return base;
}

std::span<double> EmbeddingTable::row(Family f, std::int32_t i) {
  const auto width = static_cast<std::size_t>(EmbeddingTable::width(f, d));
  return std::span<double>(family(f)).subspan(static_cast<std::size_t>(i) * width, width);
}

std::span<const double> EmbeddingTable::row(Family f, std::int32_t i) const {
  const auto width = static_cast<std::size_t>(EmbeddingTable::width(f, d));
  return std::span<const double>(family(f)).subspan(static_cast<std::size_t>(i) * width, width);
}

void mean_at(const EmbeddingTable& table, std::int32_t i, NormalizedTime t, Variant variant, std::span<double> out) {
  const auto base = table.row(Family::kBase, i);
  for (std::int32_t k = 0; k < table.d; ++k) out[k] = base[k];
  if (has_trend(variant)) {
    const double rate = table.alpha[static_cast<std::size_t>(i)] * t.value;
    const auto w = table.row(Family::kTrendDirection, i);
    for (std::int32_t k = 0; k < table.d; ++k) out[k] += rate * w[k];
  }
  if (has_seasonal(variant)) {
    const auto beta = table.row(Family::kAmplitude, i);
    const auto omega = table.row(Family::kFrequency, i);
    for (std::int32_t k = 0; k < table.d; ++k) out[k] += beta[k] * std::sin(kTwoPi * omega[k] * t.value);
  }
}

std::vector<double> entity_mean_at(const ModelParams& params, std::int32_t i, NormalizedTime t, Variant variant) {
  std::vector<double> out(static_cast<std::size_t>(params.config.d));
  mean_at(params.entities, i, t, variant, out);
  return out;
}

std::vector<double> relation_mean_at(const ModelParams& params, std::int32_t p, NormalizedTime t, Variant variant) {
  std::vector<double> out(static_cast<std::size_t>(params.config.d));
  mean_at(params.relations, p, t, variant, out);
  return out;
}

NormalizedTime time_of(const ModelParams& params, const Quadruple& q) {
  return NormalizedTime::from_step(q.t, params.config.n_steps);
}

GaussianEmbed entity_transform_at(const ModelParams& params, const Quadruple& q) {
  const NormalizedTime t = time_of(params, q);
  const Variant v = params.config.variant;
  GaussianEmbed out;
  out.mean = entity_mean_at(params, q.s, t, v);
  const auto mean_o = entity_mean_at(params, q.o, t, v);
  const auto sigma_s = params.entities.row(Family::kVariance, q.s);
  const auto sigma_o = params.entities.row(Family::kVariance, q.o);
  out.var.resize(out.mean.size());
  for (std::size_t k = 0; k < out.mean.size(); ++k) {
    out.mean[k] -= mean_o[k];
    out.var[k] = sigma_s[k] + sigma_o[k];
  }
  return out;
}

GaussianEmbed relation_embed_at(const ModelParams& params, const Quadruple& q) {
  GaussianEmbed out;
  out.mean = relation_mean_at(params, q.p, time_of(params, q), params.config.variant);
  const auto sigma = params.relations.row(Family::kVariance, q.p);
  out.var.assign(sigma.begin(), sigma.end());
  return out;
}

double diag_kl(std::span<const double> mean_p, std::span<const double> var_p, std::span<const double> mean_q,
               std::span<const double> var_q) {
  // Per dimension: (ratio - 1 - log ratio + delta^2 / var_q) / 2, each term >= 0.
  double total = 0.0;
  for (std::size_t k = 0; k < mean_p.size(); ++k) {
    const double x = var_p[k] / var_q[k] - 1.0;
    const double delta = mean_q[k] - mean_p[k];
    total += 0.5 * ((x - std::log1p(x)) + delta * delta / var_q[k]);
  }
  return total;
}

double diag_sym_kl(std::span<const double> mean_p, std::span<const double> var_p, std::span<const double> mean_q,
                   std::span<const double> var_q) {
  // Per dimension: ((a - b)^2 / ab + delta^2 (1/a + 1/b)) / 4.
  double total = 0.0;
  for (std::size_t k = 0; k < mean_p.size(); ++k) {
    const double a = var_p[k];
    const double b = var_q[k];
    const double delta = mean_q[k] - mean_p[k];
    total += 0.25 * ((a - b) * (a - b) / (a * b) + delta * delta * (1.0 / a + 1.0 / b));
  }
  return total;
}

double kl_divergence(const GaussianEmbed& p, const GaussianEmbed& q) { return diag_kl(p.mean, p.var, q.mean, q.var); }

double kl_score(const ModelParams& params, const Quadruple& q) {
  return kl_divergence(entity_transform_at(params, q), relation_embed_at(params, q));
}

double sym_kl_score(const ModelParams& params, const Quadruple& q) {
  const GaussianEmbed e = entity_transform_at(params, q);
  const GaussianEmbed r = relation_embed_at(params, q);
  return diag_sym_kl(e.mean, e.var, r.mean, r.var);
}

double ts_score(const ModelParams& params, const Quadruple& q) {
  const NormalizedTime t = time_of(params, q);
  const auto s = entity_mean_at(params, q.s, t, Variant::kTS);
  const auto r = relation_mean_at(params, q.p, t, Variant::kTS);
  const auto o = entity_mean_at(params, q.o, t, Variant::kTS);
  double sq = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double v = s[k] + r[k] - o[k];
    sq += v * v;
  }
  return std::sqrt(sq);
}

double score(const ModelParams& params, const Quadruple& q) {
  return params.config.variant == Variant::kTS ? ts_score(params, q) : sym_kl_score(params, q);
}

double interval_score(const ModelParams& params, const IntervalFact& f) {
  double total = 0.0;
  for (std::int32_t t = f.t_start; t <= f.t_end; ++t) total += score(params, {f.s, f.p, f.o, t});
  return total;
}

ModelParams init_params(const ModelConfig& config, std::mt19937_64& rng) {
  config.validate();
  ModelParams params;
  params.config = config;
  params.entities = EmbeddingTable(config.n_entities, config.d);
  params.relations = EmbeddingTable(config.n_relations, config.d);
  init_table(params.entities, config, rng);
  init_table(params.relations, config, rng);
  return params;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return init_params(config, rng);
}

ProjectionReport project_rows(ModelParams& params, std::span<const std::int32_t> entity_rows,
                              std::span<const std::int32_t> relation_rows, std::mt19937_64& rng) {
  ProjectionReport report = project_table_rows(params.entities, params.config, entity_rows, rng);
  report.reinitialized += project_table_rows(params.relations, params.config, relation_rows, rng).reinitialized;
  return report;
}

ProjectionReport project_constraints(ModelParams& params, std::mt19937_64& rng) {
  const auto all_rows = [](std::int32_t n) {
    std::vector<std::int32_t> rows(static_cast<std::size_t>(n));
    for (std::int32_t i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    return rows;
  };
  return project_rows(params, all_rows(params.entities.rows), all_rows(params.relations.rows), rng);
}

}  // namespace atise
