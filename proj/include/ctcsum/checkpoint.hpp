#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ctcsum/corpus.hpp"
#include "ctcsum/model.hpp"
#include "ctcsum/text.hpp"
#include "ctcsum/train.hpp"

namespace ctcsum {

/// Everything needed to run a trained model on raw text.
struct Checkpoint {
  ModelParams params;
  TrainConfig config;
  Vocabulary input_vocab;
  Vocabulary output_vocab;
  PreprocessConfig preprocess;
  std::uint64_t step = 0;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Corrupt, truncated or otherwise unreadable checkpoint.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChecksumError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class UnsupportedVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

/// CRC-64/XZ (ECMA-182 polynomial, reflected, all-ones init and xor-out).
std::uint64_t crc64(std::string_view bytes);

/// File layout, little-endian:
///   "CTCH" | u32 version | u64 CRC-64 of everything that follows
///   u32 length | JSON metadata (config, preprocessing, vocabularies, step)
///   per tensor in declaration order: u32 rank | u32 dims... | f32 values
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Parameters rounded through single precision, i.e. what a save/load
/// round trip yields.
ModelParams round_to_storage(const ModelParams& params);

}  // namespace ctcsum
