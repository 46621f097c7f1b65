#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ctcsum/corpus.hpp"

namespace ctcsum {

enum class SyntheticTask {
  /// Documents of single-character symbols; the headline is the salient
  /// symbols in document order.
  extract,
  /// Documents of two-character words; the headline spells out the salient
  /// words character by character. Meant for word-mode input.
  bigram,
};

struct SyntheticConfig {
  SyntheticTask task = SyntheticTask::extract;
  std::size_t pairs = 10'000;
  std::size_t doc_len = 20;
  std::size_t vocab_size = 20;
  std::size_t salient_symbols = 6;
  std::size_t min_salient = 3;
  std::size_t max_salient = 8;
  /// When false, two equal salient symbols never sit at adjacent positions.
  bool allow_adjacent_repeats = false;
  std::uint64_t seed = 1;
};

/// Deterministic for a given config. Symbols are CJK ideographs so that
/// character-mode tokenization keeps them verbatim.
std::vector<RawPair> generate_synthetic(const SyntheticConfig& cfg);

}  // namespace ctcsum
