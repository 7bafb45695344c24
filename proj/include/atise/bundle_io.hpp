#pragma once

#include <filesystem>
#include <string>

#include "atise/container.hpp"
#include "atise/data.hpp"

namespace atise {

// Bundle payload, version 1, inside the "ATISEBND" container:
//   provenance: u8 format, i32 requested_bins, u64 n, n x (str role, str path, str sha256)
//   timeline:   u8 granularity, i32 n_steps, i32s bin_bounds, i32 origin year,
//               i32 origin month (0 = absent), i32 origin day (0 = absent)
//   vocabulary: u8 reciprocal, u64 n_e + n_e str, u64 n_r + n_r str
//   splits:     train, valid, test; each i32s of 5 * count (s, p, o, t_start, t_end)
inline constexpr Magic kBundleMagic = {'A', 'T', 'I', 'S', 'E', 'B', 'N', 'D'};
inline constexpr std::uint32_t kBundleVersion = 1;

std::string encode_bundle(const DatasetBundle& bundle);
DatasetBundle decode_bundle(std::string_view bytes);

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& path);
DatasetBundle load_bundle(const std::filesystem::path& path);

// SHA-256 over the vocabulary tables and timeline; checkpoints record it so a
// model is never evaluated against a different id assignment.
std::string vocabulary_digest(const Vocabulary& vocab);

}  // namespace atise
