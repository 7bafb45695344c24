#pragma once

// Analytic gradients of the scoring functions, accumulated into sparse
// per-row records so that only parameters touched by a batch are updated.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "atise/model.hpp"

namespace atise {

// Families excluded by the model variant stay empty and are never updated.
struct RowGrad {
  std::vector<double> base;
  double alpha = 0.0;
  std::vector<double> w;
  std::vector<double> beta;
  std::vector<double> omega;
  std::vector<double> sigma;

  bool has(Family f) const;
  std::span<double> values(Family f);
  std::span<const double> values(Family f) const;
};

enum class Table : std::uint8_t { kEntity, kRelation };

struct GradRecord {
  std::int32_t d = 0;
  Variant variant = Variant::kFull;
  std::map<std::int32_t, RowGrad> entities;
  std::map<std::int32_t, RowGrad> relations;

  GradRecord() = default;
  GradRecord(std::int32_t d, Variant variant) : d(d), variant(variant) {}

  // Returns the row, creating a zero row shaped for the variant if absent.
  RowGrad& row(Table table, std::int32_t i);
  std::map<std::int32_t, RowGrad>& rows(Table table) { return table == Table::kEntity ? entities : relations; }
  const std::map<std::int32_t, RowGrad>& rows(Table table) const {
    return table == Table::kEntity ? entities : relations;
  }
  // Entry k of a family (k = 0 for alpha); nullopt when absent from the record.
  std::optional<double> value(Table table, std::int32_t i, Family f, std::int32_t k) const;

  void add(const GradRecord& other, double scale = 1.0);
  bool empty() const { return entities.empty() && relations.empty(); }
};

enum class KlDirection : std::uint8_t {
  kEntityToRelation,  // KL(P_e || P_r)
  kRelationToEntity,  // KL(P_r || P_e)
};

// record += scale * d(score)/d(params), using the variant's training score.
void accumulate_score_grad(const ModelParams& params, const Quadruple& q, double scale, GradRecord& record);
// record += scale * d KL / d(params) for one direction.
void accumulate_kl_grad(const ModelParams& params, const Quadruple& q, KlDirection direction, double scale,
                        GradRecord& record);

GradRecord grad_score(const ModelParams& params, const Quadruple& q);
GradRecord grad_kl(const ModelParams& params, const Quadruple& q, KlDirection direction);

}  // namespace atise
