#include "atise/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "atise/error.hpp"

namespace atise {

FilterIndex::FilterIndex(std::int32_t n_entities, std::int32_t n_relations, std::int32_t n_steps)
    : n_entities_(n_entities), n_relations_(n_relations), n_steps_(n_steps) {}

std::uint64_t FilterIndex::key(std::int32_t entity, std::int32_t p, std::int32_t t) const {
  return (static_cast<std::uint64_t>(entity) * static_cast<std::uint64_t>(n_relations_) +
          static_cast<std::uint64_t>(p)) *
             static_cast<std::uint64_t>(n_steps_) +
         static_cast<std::uint64_t>(t);
}

void FilterIndex::insert(const IntervalFact& fact) {
  for (std::int32_t t = fact.t_start; t <= fact.t_end; ++t) {
    objects_[key(fact.s, fact.p, t)].push_back(fact.o);
    subjects_[key(fact.o, fact.p, t)].push_back(fact.s);
  }
}

void FilterIndex::finalize() {
  for (auto* map : {&objects_, &subjects_}) {
    for (auto& [k, ids] : *map) {
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    }
  }
}

std::span<const std::int32_t> FilterIndex::objects(std::int32_t s, std::int32_t p, std::int32_t t) const {
  const auto it = objects_.find(key(s, p, t));
  return it == objects_.end() ? std::span<const std::int32_t>{} : std::span<const std::int32_t>(it->second);
}

std::span<const std::int32_t> FilterIndex::subjects(std::int32_t p, std::int32_t o, std::int32_t t) const {
  const auto it = subjects_.find(key(o, p, t));
  return it == subjects_.end() ? std::span<const std::int32_t>{} : std::span<const std::int32_t>(it->second);
}

bool FilterIndex::holds(std::int32_t s, std::int32_t p, std::int32_t o, std::int32_t t) const {
  const auto ids = objects(s, p, t);
  return std::binary_search(ids.begin(), ids.end(), o);
}

FilterIndex build_filter_index(const DatasetBundle& bundle) {
  FilterIndex index(bundle.vocab.n_entities(), bundle.vocab.relation_space(), bundle.vocab.timeline().n_steps);
  for (const Split which : {Split::kTrain, Split::kValid, Split::kTest}) {
    for (const auto& fact : bundle.split(which)) index.insert(fact);
  }
  index.finalize();
  return index;
}

std::vector<std::int32_t> filtered_candidates(const FilterIndex& index, const IntervalFact& fact, Side side) {
  const auto at = [&](std::int32_t t) {
    return side == Side::kObject ? index.objects(fact.s, fact.p, t) : index.subjects(fact.p, fact.o, t);
  };
  const auto first = at(fact.t_start);
  std::vector<std::int32_t> current(first.begin(), first.end());
  std::vector<std::int32_t> next;
  for (std::int32_t t = fact.t_start + 1; t <= fact.t_end && !current.empty(); ++t) {
    const auto ids = at(t);
    next.clear();
    std::set_intersection(current.begin(), current.end(), ids.begin(), ids.end(), std::back_inserter(next));
    current.swap(next);
  }
  return current;
}

QueryResult rank_query(const ModelParams& params, const IntervalFact& fact, Side side, const FilterIndex& index,
                       FilterMode mode, int threads) {
  const ModelConfig& config = params.config;
  const std::int32_t gold = side == Side::kSubject ? fact.s : fact.o;

  IntervalFact scored = fact;
  Side scored_side = side;
  if (config.reciprocal && side == Side::kSubject) {
    scored = {fact.o, fact.p + config.n_base_relations(), fact.s, fact.t_start, fact.t_end};
    scored_side = Side::kObject;
  }
  std::vector<double> scores(static_cast<std::size_t>(config.n_entities));
  kernels::score_candidates_parallel(params, scored, scored_side, scores, threads);

  std::vector<std::int32_t> filtered;
  if (mode == FilterMode::kFiltered) filtered = filtered_candidates(index, fact, side);

  const double gold_score = scores[static_cast<std::size_t>(gold)];
  std::int64_t better = 0;
  for (std::int32_t x = 0; x < config.n_entities; ++x) {
    if (x == gold || !(scores[static_cast<std::size_t>(x)] < gold_score)) continue;
    if (std::binary_search(filtered.begin(), filtered.end(), x)) continue;
    ++better;
  }
  QueryResult result;
  result.side = side;
  result.fact = fact;
  result.rank = better + 1;
  result.reciprocal_rank = 1.0 / static_cast<double>(result.rank);
  return result;
}

Metrics aggregate_metrics(std::span<const QueryResult> queries) {
  Metrics m;
  m.n_queries = static_cast<std::int64_t>(queries.size());
  std::int64_t hits[3] = {0, 0, 0};
  for (const auto& q : queries) {
    m.mrr += q.reciprocal_rank;
    hits[0] += q.rank <= 1;
    hits[1] += q.rank <= 3;
    hits[2] += q.rank <= 10;
  }
  const double n = static_cast<double>(std::max<std::int64_t>(m.n_queries, 1));
  m.mrr /= n;
  m.hits_at[1] = static_cast<double>(hits[0]) / n;
  m.hits_at[3] = static_cast<double>(hits[1]) / n;
  m.hits_at[10] = static_cast<double>(hits[2]) / n;
  return m;
}

Evaluation evaluate(const ModelParams& params, std::span<const IntervalFact> split, const FilterIndex& index,
                    const EvalOptions& options) {
  if (split.empty()) throw DataError("cannot evaluate an empty split");
  const auto n = static_cast<std::int64_t>(split.size());
  std::vector<QueryResult> results(static_cast<std::size_t>(2 * n));

#pragma omp parallel for schedule(dynamic, 16) num_threads(resolve_threads(options.threads))
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& fact = split[static_cast<std::size_t>(i)];
    results[static_cast<std::size_t>(2 * i)] = rank_query(params, fact, Side::kSubject, index, options.mode, 1);
    results[static_cast<std::size_t>(2 * i + 1)] = rank_query(params, fact, Side::kObject, index, options.mode, 1);
  }

  Evaluation out;
  out.metrics = aggregate_metrics(results);
  if (options.keep_queries) out.queries = std::move(results);
  return out;
}

std::string format_metrics_report(const Metrics& metrics) {
  std::ostringstream out;
  char buf[64];
  const auto line = [&](const char* name, double v) {
    std::snprintf(buf, sizeof buf, "%s\t%.6f\n", name, v);
    out << buf;
  };
  line("mrr", metrics.mrr);
  line("hits@1", metrics.hits_at.count(1) ? metrics.hits_at.at(1) : 0.0);
  line("hits@3", metrics.hits_at.count(3) ? metrics.hits_at.at(3) : 0.0);
  line("hits@10", metrics.hits_at.count(10) ? metrics.hits_at.at(10) : 0.0);
  out << "n_queries\t" << metrics.n_queries << '\n';
  return out.str();
}

std::string format_rank_dump(std::span<const QueryResult> queries, const Vocabulary& vocab) {
  std::ostringstream out;
  out << "side\tsubject\tpredicate\tobject\tt_start\tt_end\trank\n";
  for (const auto& q : queries) {
    out << (q.side == Side::kSubject ? "subject" : "object") << '\t' << vocab.entity_label(q.fact.s) << '\t'
        << vocab.relation_label(q.fact.p) << '\t' << vocab.entity_label(q.fact.o) << '\t' << q.fact.t_start << '\t'
        << q.fact.t_end << '\t' << q.rank << '\n';
  }
  return out.str();
}

}  // namespace atise
