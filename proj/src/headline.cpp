#include "ctcsum/headline.hpp"

#include "ctcsum/model.hpp"

namespace ctcsum {

void WindowConfig::validate() const {
  if (window_len == 0 || stride == 0 || max_windows == 0)
    throw std::invalid_argument("window_len, stride and max_windows must be at least 1");
  if (scan_len < window_len) throw std::invalid_argument("scan_len must be >= window_len");
}

std::vector<Window> window_spans(std::size_t doc_len, const WindowConfig& cfg) {
  cfg.validate();
  const std::size_t limit = std::min(doc_len, cfg.scan_len);
  std::vector<Window> out;
  for (std::size_t offset = 0; offset < limit && out.size() < cfg.max_windows;
       offset += cfg.stride)
    out.push_back({offset, std::min(cfg.window_len, limit - offset)});
  return out;
}

Summary summarize_document(const Checkpoint& model, std::string_view document,
                           const SummarizeOptions& opts) {
  opts.windows.validate();
  const PreprocessConfig& prep = model.preprocess;
  const std::vector<std::string> tokens = tokenize(document, prep.mode);
  const LabelSequence ids = encode(tokens, model.input_vocab);

  // Overlap is counted over characters, so word-mode input is respelled.
  std::vector<std::string> prefix;
  for (std::size_t i = 0; i < std::min(tokens.size(), opts.windows.scan_len); ++i) {
    if (prep.mode == TokenMode::character) {
      prefix.push_back(tokens[i]);
    } else {
      for (std::string& c : tokenize(tokens[i], TokenMode::character)) prefix.push_back(std::move(c));
    }
  }

  Summary summary;
  std::vector<std::vector<std::string>> rendered;
  std::vector<std::vector<double>> saliencies;
  for (const Window& w : window_spans(ids.size(), opts.windows)) {
    std::span<const LabelId> slice(ids.data() + w.offset, w.length);
    ForwardResult fwd = forward(model.params, k_fold(slice, prep.k));
    WindowCandidate cand;
    cand.window = w;
    cand.labels = decode(fwd.emissions, opts.decode).labels;
    cand.text = decode_ids(cand.labels, model.output_vocab);
    rendered.push_back(id_tokens(cand.labels, model.output_vocab));
    cand.overlap = multiset_overlap(std::span<const std::string>(rendered.back()),
                                    std::span<const std::string>(prefix));
    saliencies.push_back(blank_saliency(fwd.emissions));
    summary.candidates.push_back(std::move(cand));
  }
  if (summary.candidates.empty()) return summary;

  const HeadlineChoice choice = select_headline(rendered, std::span<const std::string>(prefix));
  const WindowCandidate& best = summary.candidates[choice.index];
  summary.chosen = choice.index;
  summary.overlap = choice.overlap;
  summary.labels = best.labels;
  summary.headline = best.text;
  summary.saliency = std::move(saliencies[choice.index]);
  return summary;
}

}  // namespace ctcsum
