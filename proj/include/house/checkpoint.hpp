#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>

#include "house/dataset.hpp"
#include "house/model.hpp"

namespace house {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CheckpointVersionError : CheckpointError {
  using CheckpointError::CheckpointError;
};
struct CheckpointTruncatedError : CheckpointError {
  using CheckpointError::CheckpointError;
};
struct CheckpointVariantError : CheckpointError {
  using CheckpointError::CheckpointError;
};

// Order-sensitive FNV-1a fingerprint of the vocabulary (entity names then
// relation names). Ties a checkpoint to the id assignment it was trained
// with, so evaluating against a differently-indexed dataset is detectable.
std::uint64_t vocab_digest(const Vocab& vocab);

struct CheckpointHeader {
  int format_version = 1;
  Variant variant = Variant::kHouse;
  int d = 0, k = 0, m = 0, n = 0;
  int num_entities = 0, num_relations = 0;
  std::uint64_t seed = 0;
  std::uint64_t digest = 0;
};

struct LoadedCheckpoint {
  CheckpointHeader header;
  Model model;
};

// Single-file binary format: magic bytes, a length-prefixed key=value
// metadata block, then all parameters as little-endian 64-bit floats
// (entities first, then each relation's blocks). save/load round-trips
// bitwise on every platform.
void save_checkpoint(const Model& model, const std::filesystem::path& path,
                     std::uint64_t digest);

// Throws CheckpointVersionError / CheckpointTruncatedError on malformed
// files and CheckpointVariantError when expect_variant is given and differs
// from the stored one. Digest policy is the caller's: compare
// header.digest against vocab_digest() of the dataset in use.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 std::optional<Variant> expect_variant = std::nullopt);

}  // namespace house
