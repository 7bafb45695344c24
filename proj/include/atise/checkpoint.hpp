#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "atise/container.hpp"
#include "atise/trainer.hpp"

namespace atise {

// Checkpoint payload, version 1, inside the "ATISECKP" container:
//   str vocab_digest
//   model config: i32 d, u8 variant, f64 c_min, f64 c_max, i32 n_entities,
//                 i32 n_relations, i32 n_steps, u8 reciprocal
//   train config: f64 lr, i32 batch_size, i32 eta, f64 gamma, f64 adv_temp,
//                 i32 max_epochs, i32 patience, i32 eval_every, u64 seed,
//                 u8 reciprocal, i32 threads
//   i64 epoch, f64 best_valid_mrr, i32 stale_validations, str rng state
//   params: entity table then relation table; each table is the six
//           families (base, alpha, w, beta, omega, sigma) as f64 vectors
//   adam: f64 beta1, f64 beta2, f64 epsilon, i64 step, then the m/v tables
//         for entities and relations in the same table layout
inline constexpr Magic kCheckpointMagic = {'A', 'T', 'I', 'S', 'E', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Throws ShapeMismatchError when the checkpoint was not trained on `bundle`
// (vocabulary digest, table sizes, timeline) or has a different d.
void check_compatible(const Checkpoint& checkpoint, const DatasetBundle& bundle,
                      std::optional<std::int32_t> expected_d = std::nullopt);

}  // namespace atise
