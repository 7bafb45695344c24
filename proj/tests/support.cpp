#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <stdexcept>
#include <tuple>

namespace atise::testing {
namespace {

Date toy_date(std::int32_t step) {
  // January has 31 days; the toy timelines stay well below that.
  return Date{2014, 1, 1 + step};
}

std::vector<double> planted_mean(const std::vector<double>& base, const std::vector<double>& drift,
                                 const std::vector<double>& amp, const std::vector<double>& freq, std::size_t row,
                                 std::size_t d, double t) {
  std::vector<double> out(d);
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t at = row * d + k;
    out[k] = base[at] + drift[at] * t + amp[at] * std::sin(2.0 * std::numbers::pi * freq[at] * t);
  }
  return out;
}

double determinant(std::vector<double> m, std::size_t n) {
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(m[r * n + col]) > std::abs(m[pivot * n + col])) pivot = r;
    }
    if (m[pivot * n + col] == 0.0) return 0.0;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m[col * n + c], m[pivot * n + c]);
      det = -det;
    }
    det *= m[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m[r * n + col] / m[col * n + col];
      for (std::size_t c = col; c < n; ++c) m[r * n + c] -= f * m[col * n + c];
    }
  }
  return det;
}

std::vector<double> inverse(std::vector<double> m, std::size_t n) {
  std::vector<double> inv(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(m[r * n + col]) > std::abs(m[pivot * n + col])) pivot = r;
    }
    for (std::size_t c = 0; c < n; ++c) {
      std::swap(m[col * n + c], m[pivot * n + c]);
      std::swap(inv[col * n + c], inv[pivot * n + c]);
    }
    const double p = m[col * n + col];
    for (std::size_t c = 0; c < n; ++c) {
      m[col * n + c] /= p;
      inv[col * n + c] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r * n + col];
      for (std::size_t c = 0; c < n; ++c) {
        m[r * n + c] -= f * m[col * n + c];
        inv[r * n + c] -= f * inv[col * n + c];
      }
    }
  }
  return inv;
}

double gaussian_pdf(double x, double m, double v) {
  return std::exp(-(x - m) * (x - m) / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
}

}  // namespace

std::vector<RawFact> toy_facts(const ToyOptions& options) {
  std::mt19937_64 rng(options.seed);
  const auto d = static_cast<std::size_t>(options.planted_d);
  const auto n_e = static_cast<std::size_t>(options.entities);
  const auto n_r = static_cast<std::size_t>(options.relations);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](std::size_t n, double scale) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * normal(rng);
    return v;
  };
  const auto e_base = draw(n_e * d, 1.0), e_drift = draw(n_e * d, 0.5), e_amp = draw(n_e * d, 0.5);
  const auto r_base = draw(n_r * d, 1.0), r_drift = draw(n_r * d, 0.5), r_amp = draw(n_r * d, 0.5);
  std::vector<double> e_freq(n_e * d), r_freq(n_r * d);
  for (auto& x : e_freq) x = unit(rng);
  for (auto& x : r_freq) x = unit(rng);

  std::uniform_int_distribution<std::int32_t> pick_e(0, options.entities - 1);
  std::uniform_int_distribution<std::int32_t> pick_r(0, options.relations - 1);
  std::uniform_int_distribution<std::int32_t> pick_t(0, options.steps - 1);

  std::set<std::tuple<std::int32_t, std::int32_t, std::int32_t, std::int32_t>> seen;
  std::vector<RawFact> facts;
  std::int32_t forced_step = 0;
  while (static_cast<std::int32_t>(facts.size()) < options.facts) {
    const std::int32_t s = pick_e(rng);
    const std::int32_t p = pick_r(rng);
    const std::int32_t step = forced_step < options.steps ? forced_step++ : pick_t(rng);
    const double t = static_cast<double>(step) / options.steps;
    const auto ms = planted_mean(e_base, e_drift, e_amp, e_freq, static_cast<std::size_t>(s), d, t);
    const auto mr = planted_mean(r_base, r_drift, r_amp, r_freq, static_cast<std::size_t>(p), d, t);
    std::int32_t best = -1;
    double best_dist = 0.0;
    for (std::int32_t x = 0; x < options.entities; ++x) {
      if (x == s) continue;
      const auto mx = planted_mean(e_base, e_drift, e_amp, e_freq, static_cast<std::size_t>(x), d, t);
      double dist = 0.0;
      for (std::size_t k = 0; k < d; ++k) dist += (ms[k] + mr[k] - mx[k]) * (ms[k] + mr[k] - mx[k]);
      if (best < 0 || dist < best_dist) {
        best = x;
        best_dist = dist;
      }
    }
    if (!seen.emplace(s, p, best, step).second) continue;
    facts.push_back(RawFact{"e" + std::to_string(s), "r" + std::to_string(p), "e" + std::to_string(best),
                            PointTime{toy_date(step)}});
  }
  return facts;
}

DatasetBundle toy_bundle(const ToyOptions& options, bool reciprocal) {
  const auto facts = toy_facts(options);
  return make_bundle(facts, facts, facts, TimelineOptions{}, reciprocal);
}

DatasetBundle ranking_fixture(bool reciprocal) {
  const Timeline timeline{Granularity::kYearBinned, 5, {2000, 2001, 2002, 2003, 2004}, {}};
  DatasetBundle b;
  b.vocab = Vocabulary({"a", "b", "c", "d", "e", "f", "g", "h"}, {"p", "q", "r"}, timeline, reciprocal);
  b.train = {{0, 0, 1, 0, 4}, {0, 0, 2, 1, 3}, {0, 0, 3, 2, 2}, {4, 1, 5, 0, 1}, {6, 1, 5, 1, 1},
             {7, 2, 0, 3, 4}, {1, 2, 0, 0, 4}, {2, 0, 1, 2, 4}, {3, 1, 6, 4, 4}};
  b.valid = {{0, 0, 4, 2, 3}, {5, 1, 5, 0, 0}};
  b.test = {{0, 0, 1, 1, 2}, {4, 1, 5, 1, 1}, {7, 2, 0, 4, 4}, {2, 0, 3, 0, 4}, {6, 1, 2, 2, 3}};
  return b;
}

ModelParams random_params(const ModelConfig& config, std::mt19937_64& rng) {
  ModelParams params = init_params(config, rng);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> var(config.c_min, config.c_max);
  for (EmbeddingTable* table : {&params.entities, &params.relations}) {
    for (const Family f : kAllFamilies) {
      for (double& x : table->family(f)) x = f == Family::kVariance ? var(rng) : sym(rng);
    }
  }
  return params;
}

double dense_gaussian_kl(const std::vector<double>& m0, const std::vector<double>& s0, const std::vector<double>& m1,
                         const std::vector<double>& s1) {
  const std::size_t n = m0.size();
  const auto s1_inv = inverse(s1, n);
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) trace += s1_inv[i * n + k] * s0[k * n + i];
  }
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) quad += (m1[i] - m0[i]) * s1_inv[i * n + k] * (m1[k] - m0[k]);
  }
  return 0.5 * (trace + quad - static_cast<double>(n) + std::log(determinant(s1, n) / determinant(s0, n)));
}

double numeric_kl_1d(double m0, double v0, double m1, double v1) {
  const double sd = std::sqrt(v0);
  const double lo = m0 - 14.0 * sd;
  const double hi = m0 + 14.0 * sd;
  const int n = 20000;  // even
  const double h = (hi - lo) / n;
  auto f = [&](double x) {
    const double p = gaussian_pdf(x, m0, v0);
    if (p == 0.0) return 0.0;
    // log p - log q written out to avoid underflow of q in the tails.
    const double log_ratio = -0.5 * std::log(v0 / v1) - (x - m0) * (x - m0) / (2.0 * v0) +
                             (x - m1) * (x - m1) / (2.0 * v1);
    return p * log_ratio;
  };
  double sum = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(lo + i * h);
  return sum * h / 3.0;
}

std::int64_t brute_force_rank(const ModelParams& params, const DatasetBundle& bundle, const IntervalFact& fact,
                              Side side, FilterMode mode) {
  std::set<std::tuple<std::int32_t, std::int32_t, std::int32_t, std::int32_t>> known;
  for (const auto* split : {&bundle.train, &bundle.valid, &bundle.test}) {
    for (const IntervalFact& f : *split) {
      for (std::int32_t t = f.t_start; t <= f.t_end; ++t) known.emplace(f.s, f.p, f.o, t);
    }
  }
  const bool inverse_query = params.config.reciprocal && side == Side::kSubject;
  const std::int32_t n_base = params.config.n_base_relations();

  auto candidate_score = [&](std::int32_t x) {
    double total = 0.0;
    for (std::int32_t t = fact.t_start; t <= fact.t_end; ++t) {
      Quadruple q;
      if (inverse_query) {
        q = {fact.o, fact.p + n_base, x, t};
      } else if (side == Side::kSubject) {
        q = {x, fact.p, fact.o, t};
      } else {
        q = {fact.s, fact.p, x, t};
      }
      total += score(params, q);
    }
    return total;
  };
  auto always_true = [&](std::int32_t x) {
    for (std::int32_t t = fact.t_start; t <= fact.t_end; ++t) {
      const bool hit = side == Side::kSubject ? known.count({x, fact.p, fact.o, t}) > 0
                                              : known.count({fact.s, fact.p, x, t}) > 0;
      if (!hit) return false;
    }
    return true;
  };

  const std::int32_t gold = side == Side::kSubject ? fact.s : fact.o;
  const double gold_score = candidate_score(gold);
  std::int64_t rank = 1;
  for (std::int32_t x = 0; x < params.config.n_entities; ++x) {
    if (x == gold) continue;
    if (mode == FilterMode::kFiltered && always_true(x)) continue;
    if (candidate_score(x) < gold_score) ++rank;
  }
  return rank;
}

double gradient_check(const ModelParams& params, const GradRecord& analytic,
                      const std::function<double(const ModelParams&)>& f, double h) {
  ModelParams probe = params;
  double diff_sq = 0.0, analytic_sq = 0.0, numeric_sq = 0.0;
  for (const Table table : {Table::kEntity, Table::kRelation}) {
    EmbeddingTable& t = table == Table::kEntity ? probe.entities : probe.relations;
    for (std::int32_t i = 0; i < t.rows; ++i) {
      for (const Family family : kAllFamilies) {
        auto row = t.row(family, i);
        for (std::size_t k = 0; k < row.size(); ++k) {
          const double saved = row[k];
          row[k] = saved + h;
          const double up = f(probe);
          row[k] = saved - h;
          const double down = f(probe);
          row[k] = saved;
          const double numeric = (up - down) / (2.0 * h);
          const double exact = analytic.value(table, i, family, static_cast<std::int32_t>(k)).value_or(0.0);
          diff_sq += (exact - numeric) * (exact - numeric);
          analytic_sq += exact * exact;
          numeric_sq += numeric * numeric;
        }
      }
    }
  }
  const double scale = std::sqrt(std::max(analytic_sq, numeric_sq));
  return scale == 0.0 ? 0.0 : std::sqrt(diff_sq) / scale;
}

double frozen_weight_loss(const ModelParams& params, const ModelParams& weights_from,
                          std::span<const Quadruple> positives, std::span<const Quadruple> negatives, double gamma,
                          double adv_temp) {
  auto softplus_neg = [](double x) { return std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x))); };
  const std::size_t eta = positives.empty() ? 0 : negatives.size() / positives.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    loss += softplus_neg(gamma - score(params, positives[i]));
    std::vector<double> logits(eta);
    double top = -1e300;
    for (std::size_t j = 0; j < eta; ++j) {
      logits[j] = -adv_temp * score(weights_from, negatives[i * eta + j]);
      top = std::max(top, logits[j]);
    }
    double total = 0.0;
    for (double& l : logits) total += (l = std::exp(l - top));
    for (std::size_t j = 0; j < eta; ++j) {
      loss += logits[j] / total * softplus_neg(score(params, negatives[i * eta + j]) - gamma);
    }
  }
  return loss;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("atise-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace atise::testing
