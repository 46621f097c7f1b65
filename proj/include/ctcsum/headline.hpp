#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctcsum/checkpoint.hpp"
#include "ctcsum/decode.hpp"
#include "ctcsum/emission.hpp"

namespace ctcsum {

/// Sliding-window settings, in input elements (characters by default).
struct WindowConfig {
  std::size_t window_len = 55;
  std::size_t stride = 5;
  std::size_t max_windows = 20;
  std::size_t scan_len = 150;

  /// Throws std::invalid_argument when any count is zero or scan_len < window_len.
  void validate() const;
};

struct Window {
  std::size_t offset = 0;
  std::size_t length = 0;
};

/// Window placements over the first min(doc_len, scan_len) elements:
/// offsets 0, stride, 2*stride, ... below that limit, each truncated at it,
/// at most max_windows of them. Empty for doc_len == 0.
std::vector<Window> window_spans(std::size_t doc_len, const WindowConfig& cfg);

template <class T>
std::vector<std::vector<T>> windows(std::span<const T> document, const WindowConfig& cfg) {
  std::vector<std::vector<T>> out;
  for (const Window& w : window_spans(document.size(), cfg))
    out.emplace_back(document.begin() + w.offset, document.begin() + w.offset + w.length);
  return out;
}

/// Size of the multiset intersection: each headline token consumes at most
/// one matching prefix token.
template <class T>
std::size_t multiset_overlap(std::span<const T> headline, std::span<const T> prefix) {
  std::map<T, std::size_t> available;
  for (const T& tok : prefix) ++available[tok];
  std::size_t overlap = 0;
  for (const T& tok : headline) {
    auto it = available.find(tok);
    if (it != available.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return overlap;
}

struct HeadlineChoice {
  std::size_t index = 0;  ///< position in the candidate list
  std::size_t overlap = 0;
};

/// Candidate with the largest overlap with `prefix`; the earliest wins ties.
/// Throws std::invalid_argument for an empty candidate list.
template <class T>
HeadlineChoice select_headline(const std::vector<std::vector<T>>& candidates,
                               std::span<const T> prefix) {
  if (candidates.empty()) throw std::invalid_argument("select_headline: no candidates");
  HeadlineChoice best;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::size_t ov = multiset_overlap(std::span<const T>(candidates[i]), prefix);
    if (i == 0 || ov > best.overlap) best = {i, ov};
  }
  return best;
}

struct SummarizeOptions {
  WindowConfig windows;
  DecodeConfig decode;
};

struct WindowCandidate {
  Window window;
  LabelSequence labels;
  std::string text;
  std::size_t overlap = 0;
};

struct Summary {
  std::string headline;
  LabelSequence labels;
  std::size_t overlap = 0;
  std::size_t chosen = 0;  ///< index into candidates
  std::vector<WindowCandidate> candidates;
  /// 1 - P(blank) for each frame of the chosen window (after k-folding).
  std::vector<double> saliency;
};

/// Windows the document, decodes each window with the checkpoint's model
/// and keeps the headline sharing most characters with the first scan_len
/// document elements. An empty document yields an empty headline.
Summary summarize_document(const Checkpoint& model, std::string_view document,
                           const SummarizeOptions& opts);

}  // namespace ctcsum
