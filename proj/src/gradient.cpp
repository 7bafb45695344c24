#include "atise/gradient.hpp"

#include <cmath>
#include <numbers>

namespace atise {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class ScoreKind { kSym, kForward, kBackward, kTranslation };

RowGrad make_row(std::int32_t d, Variant variant) {
  const auto n = static_cast<std::size_t>(d);
  RowGrad row;
  row.base.assign(n, 0.0);
  if (has_trend(variant)) row.w.assign(n, 0.0);
  if (has_seasonal(variant)) {
    row.beta.assign(n, 0.0);
    row.omega.assign(n, 0.0);
  }
  if (has_noise(variant)) row.sigma.assign(n, 0.0);
  return row;
}

// Pushes an upstream gradient g = d(score)/d(mean) through the additive
// time-series decomposition of one row.
void chain_mean(const EmbeddingTable& table, std::int32_t i, double t, Variant variant, std::span<const double> g,
                double scale, RowGrad& out) {
  const std::int32_t d = table.d;
  for (std::int32_t k = 0; k < d; ++k) out.base[k] += scale * g[k];
  if (has_trend(variant)) {
    const auto w = table.row(Family::kTrendDirection, i);
    const double alpha = table.alpha[static_cast<std::size_t>(i)];
    double w_dot_g = 0.0;
    for (std::int32_t k = 0; k < d; ++k) {
      w_dot_g += w[k] * g[k];
      out.w[k] += scale * alpha * t * g[k];
    }
    out.alpha += scale * t * w_dot_g;
  }
  if (has_seasonal(variant)) {
    const auto beta = table.row(Family::kAmplitude, i);
    const auto omega = table.row(Family::kFrequency, i);
    for (std::int32_t k = 0; k < d; ++k) {
      const double phase = kTwoPi * omega[k] * t;
      out.beta[k] += scale * std::sin(phase) * g[k];
      out.omega[k] += scale * beta[k] * std::cos(phase) * kTwoPi * t * g[k];
    }
  }
}

void accumulate(const ModelParams& params, const Quadruple& q, ScoreKind kind, double scale, GradRecord& record) {
  const ModelConfig& config = params.config;
  const Variant variant = config.variant;
  const auto d = static_cast<std::size_t>(config.d);
  const NormalizedTime t = time_of(params, q);

  std::vector<double> mean_s(d), mean_o(d), mean_r(d);
  mean_at(params.entities, q.s, t, variant, mean_s);
  mean_at(params.entities, q.o, t, variant, mean_o);
  mean_at(params.relations, q.p, t, variant, mean_r);

  // Gradients with respect to the three means (and variances for KL scores).
  std::vector<double> g_s(d), g_o(d), g_r(d);
  std::vector<double> g_var_e, g_var_r;

  if (kind == ScoreKind::kTranslation) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double v = mean_s[k] + mean_r[k] - mean_o[k];
      g_s[k] = v;
      sq += v * v;
    }
    const double norm = std::sqrt(sq);
    // The norm is not differentiable at 0; use the zero subgradient there.
    const double inv = norm > 0.0 ? 1.0 / norm : 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      g_s[k] *= inv;
      g_r[k] = g_s[k];
      g_o[k] = -g_s[k];
    }
  } else {
    g_var_e.assign(d, 0.0);
    g_var_r.assign(d, 0.0);
    const auto sigma_s = params.entities.row(Family::kVariance, q.s);
    const auto sigma_o = params.entities.row(Family::kVariance, q.o);
    const auto sigma_r = params.relations.row(Family::kVariance, q.p);
    const double fwd = kind == ScoreKind::kSym ? 0.5 : (kind == ScoreKind::kForward ? 1.0 : 0.0);
    const double bwd = kind == ScoreKind::kSym ? 0.5 : (kind == ScoreKind::kBackward ? 1.0 : 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      const double delta = mean_s[k] - mean_o[k] - mean_r[k];
      const double a = sigma_s[k] + sigma_o[k];
      const double b = sigma_r[k];
      const double d2 = delta * delta;
      // KL(P_e || P_r) = 1/2 [a/b - 1 - log(a/b) + delta^2 / b]
      // KL(P_r || P_e) = 1/2 [b/a - 1 - log(b/a) + delta^2 / a]
      const double g_delta = fwd * delta / b + bwd * delta / a;
      g_var_e[k] = fwd * 0.5 * (1.0 / b - 1.0 / a) + bwd * 0.5 * (a - b - d2) / (a * a);
      g_var_r[k] = fwd * 0.5 * (b - a - d2) / (b * b) + bwd * 0.5 * (1.0 / a - 1.0 / b);
      g_s[k] = g_delta;
      g_o[k] = -g_delta;
      g_r[k] = -g_delta;
    }
  }

  chain_mean(params.entities, q.s, t.value, variant, g_s, scale, record.row(Table::kEntity, q.s));
  chain_mean(params.entities, q.o, t.value, variant, g_o, scale, record.row(Table::kEntity, q.o));
  chain_mean(params.relations, q.p, t.value, variant, g_r, scale, record.row(Table::kRelation, q.p));

  if (kind != ScoreKind::kTranslation && has_noise(variant)) {
    auto& row_s = record.row(Table::kEntity, q.s).sigma;
    for (std::size_t k = 0; k < d; ++k) row_s[k] += scale * g_var_e[k];
    auto& row_o = record.row(Table::kEntity, q.o).sigma;
    for (std::size_t k = 0; k < d; ++k) row_o[k] += scale * g_var_e[k];
    auto& row_r = record.row(Table::kRelation, q.p).sigma;
    for (std::size_t k = 0; k < d; ++k) row_r[k] += scale * g_var_r[k];
  }
}

}  // namespace

bool RowGrad::has(Family f) const {
  switch (f) {
    case Family::kBase: return !base.empty();
    case Family::kTrendRate:
    case Family::kTrendDirection: return !w.empty();
    case Family::kAmplitude: return !beta.empty();
    case Family::kFrequency: return !omega.empty();
    case Family::kVariance: return !sigma.empty();
  }
  return false;
}

std::span<double> RowGrad::values(Family f) {
  switch (f) {
    case Family::kBase: return base;
    case Family::kTrendRate: return w.empty() ? std::span<double>{} : std::span<double>(&alpha, 1);
    case Family::kTrendDirection: return w;
    case Family::kAmplitude: return beta;
    case Family::kFrequency: return omega;
    case Family::kVariance: return sigma;
  }
  return {};
}

std::span<const double> RowGrad::values(Family f) const { return const_cast<RowGrad&>(*this).values(f); }

RowGrad& GradRecord::row(Table table, std::int32_t i) {
  auto& map = rows(table);
  auto it = map.find(i);
  if (it == map.end()) it = map.emplace(i, make_row(d, variant)).first;
  return it->second;
}

std::optional<double> GradRecord::value(Table table, std::int32_t i, Family f, std::int32_t k) const {
  const auto& map = rows(table);
  const auto it = map.find(i);
  if (it == map.end() || !it->second.has(f)) return std::nullopt;
  return it->second.values(f)[static_cast<std::size_t>(k)];
}

void GradRecord::add(const GradRecord& other, double scale) {
  for (const Table table : {Table::kEntity, Table::kRelation}) {
    for (const auto& [i, src] : other.rows(table)) {
      RowGrad& dst = row(table, i);
      for (const Family f : kAllFamilies) {
        if (!src.has(f)) continue;
        const auto in = src.values(f);
        auto out = dst.values(f);
        for (std::size_t k = 0; k < in.size(); ++k) out[k] += scale * in[k];
      }
    }
  }
}

void accumulate_score_grad(const ModelParams& params, const Quadruple& q, double scale, GradRecord& record) {
  accumulate(params, q, params.config.variant == Variant::kTS ? ScoreKind::kTranslation : ScoreKind::kSym, scale,
             record);
}

void accumulate_kl_grad(const ModelParams& params, const Quadruple& q, KlDirection direction, double scale,
                        GradRecord& record) {
  accumulate(params, q, direction == KlDirection::kEntityToRelation ? ScoreKind::kForward : ScoreKind::kBackward,
             scale, record);
}

GradRecord grad_score(const ModelParams& params, const Quadruple& q) {
  GradRecord record(params.config.d, params.config.variant);
  accumulate_score_grad(params, q, 1.0, record);
  return record;
}

GradRecord grad_kl(const ModelParams& params, const Quadruple& q, KlDirection direction) {
  GradRecord record(params.config.d, params.config.variant);
  accumulate_kl_grad(params, q, direction, 1.0, record);
  return record;
}

}  // namespace atise
