#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctcsum/emission.hpp"

namespace ctcsum {

/// Merge adjacent equal labels, then drop blanks.
LabelSequence collapse(std::span<const LabelId> path);

enum class DecodeMethod { greedy, beam };

struct DecodeResult {
  LabelSequence labels;
  LogProb score = 0.0;
  DecodeMethod method = DecodeMethod::greedy;
};

inline constexpr std::size_t kDefaultBeamWidth = 8;

struct DecodeConfig {
  DecodeMethod method = DecodeMethod::beam;
  std::size_t beam_width = kDefaultBeamWidth;
};

/// Per-frame argmax. Ties go to the lowest id, so a fully tied frame is blank.
LabelSequence best_path(const EmissionMatrix& y);

/// collapse(best_path(y)); score is the log probability of the best path.
DecodeResult greedy_decode(const EmissionMatrix& y);

/// Prefix beam search without a language model. Each prefix tracks the
/// mass of paths ending in blank and ending in its last label separately;
/// the score is the total log probability of the returned label sequence.
/// Throws std::invalid_argument when beam_width == 0.
DecodeResult beam_decode(const EmissionMatrix& y, std::size_t beam_width);

DecodeResult decode(const EmissionMatrix& y, const DecodeConfig& cfg);

/// 1 - P(blank) per frame.
std::vector<double> blank_saliency(const EmissionMatrix& y);

}  // namespace ctcsum
