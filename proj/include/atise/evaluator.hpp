#pragma once

// Link prediction under the time-wise filtered setting: a competitor is
// removed only when its substituted fact holds at the query's step (or at
// every step of the query interval).

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "atise/data.hpp"
#include "atise/kernels.hpp"
#include "atise/model.hpp"

namespace atise {

class FilterIndex {
 public:
  FilterIndex() = default;
  FilterIndex(std::int32_t n_entities, std::int32_t n_relations, std::int32_t n_steps);

  // Inserts the fact at every step of its interval.
  void insert(const IntervalFact& fact);
  // Sorts and deduplicates; call once after the last insert.
  void finalize();

  // Sorted entity ids; empty when nothing is known.
  std::span<const std::int32_t> objects(std::int32_t s, std::int32_t p, std::int32_t t) const;
  std::span<const std::int32_t> subjects(std::int32_t p, std::int32_t o, std::int32_t t) const;
  bool holds(std::int32_t s, std::int32_t p, std::int32_t o, std::int32_t t) const;

 private:
  std::uint64_t key(std::int32_t entity, std::int32_t p, std::int32_t t) const;

  std::int32_t n_entities_ = 0;
  std::int32_t n_relations_ = 0;
  std::int32_t n_steps_ = 0;
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> objects_;
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> subjects_;
};

// Covers train, valid and test.
FilterIndex build_filter_index(const DatasetBundle& bundle);

enum class FilterMode : std::uint8_t { kFiltered, kRaw };

struct QueryResult {
  Side side = Side::kObject;
  IntervalFact fact;
  std::int64_t rank = 1;
  double reciprocal_rank = 1.0;
};

// Entities that make the substituted fact true throughout the fact's interval.
std::vector<std::int32_t> filtered_candidates(const FilterIndex& index, const IntervalFact& fact, Side side);

// rank = 1 + number of surviving competitors with a strictly lower score.
// With a reciprocal model, subject queries are answered as object queries on
// the inverse relation.
QueryResult rank_query(const ModelParams& params, const IntervalFact& fact, Side side, const FilterIndex& index,
                       FilterMode mode = FilterMode::kFiltered, int threads = 1);

struct Metrics {
  double mrr = 0.0;
  std::map<int, double> hits_at;  // k in {1, 3, 10}
  std::int64_t n_queries = 0;
};

Metrics aggregate_metrics(std::span<const QueryResult> queries);

struct EvalOptions {
  FilterMode mode = FilterMode::kFiltered;
  int threads = 1;
  bool keep_queries = false;
};

struct Evaluation {
  Metrics metrics;
  // Subject query then object query per fact, in split order (keep_queries only).
  std::vector<QueryResult> queries;
};

// Throws DataError on an empty split.
Evaluation evaluate(const ModelParams& params, std::span<const IntervalFact> split, const FilterIndex& index,
                    const EvalOptions& options = {});

// "metric<TAB>value" lines: mrr, hits@1, hits@3, hits@10, n_queries.
std::string format_metrics_report(const Metrics& metrics);
std::string format_rank_dump(std::span<const QueryResult> queries, const Vocabulary& vocab);

}  // namespace atise
