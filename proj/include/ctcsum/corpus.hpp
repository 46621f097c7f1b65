#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctcsum/emission.hpp"
#include "ctcsum/text.hpp"

namespace ctcsum {

/// A raw (document, headline) pair as read from a JSON Lines corpus.
struct RawPair {
  std::string id;
  std::string document;
  std::string headline;
};

/// One encoded training pair: input-vocabulary ids and output-label ids.
struct CorpusPair {
  std::string id;
  LabelSequence document;
  LabelSequence headline;
};

/// Malformed corpus line. `line()` is 1-based.
class CorpusFormatError : public std::runtime_error {
 public:
  CorpusFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads {"document": ..., "headline": ..., "id"?: ...} objects, one per
/// line. Blank lines are skipped; missing ids become the 1-based line number.
/// `require_headline = false` accepts document-only lines.
std::vector<RawPair> read_corpus_jsonl(std::istream& in, bool require_headline = true);
std::vector<RawPair> read_corpus_jsonl(const std::filesystem::path& path,
                                       bool require_headline = true);
void write_corpus_jsonl(std::span<const RawPair> pairs, std::ostream& out);

/// How raw text becomes model input.
struct PreprocessConfig {
  TokenMode mode = TokenMode::character;
  std::size_t k = 1;
  /// Keep only the first `truncate` input elements before k-folding; 0 keeps all.
  std::size_t truncate = 0;

  bool operator==(const PreprocessConfig&) const = default;
};

inline constexpr std::size_t kDefaultCharTruncate = 55;

/// Tokenize, truncate, encode and k-fold a document.
LabelSequence prepare_document(std::string_view document, const Vocabulary& input_vocab,
                               const PreprocessConfig& cfg);

struct PrepareStats {
  std::size_t pairs = 0;
  std::size_t input_tokens = 0;
  std::size_t input_oov = 0;
  /// Headline tokens missing from the output vocabulary; they are dropped.
  std::size_t headline_oov = 0;
  /// Headline needs more frames than the prepared document provides.
  std::size_t infeasible = 0;

  double oov_rate() const {
    return input_tokens == 0 ? 0.0 : static_cast<double>(input_oov) / input_tokens;
  }
};

struct EncodedCorpus {
  PreprocessConfig preprocess;
  std::vector<CorpusPair> pairs;
};

/// Documents are tokenized with cfg.mode; headlines always per character.
EncodedCorpus encode_corpus(std::span<const RawPair> raw, const Vocabulary& input_vocab,
                            const Vocabulary& output_vocab, const PreprocessConfig& cfg,
                            PrepareStats* stats = nullptr);

/// Binary encoded corpus: "CTCE", u32 version, u32 metadata length, JSON
/// metadata (preprocessing and ids), then per pair u32 length + u32 ids for
/// the document and then the headline. Little-endian.
void write_encoded_corpus(const EncodedCorpus& corpus, const std::filesystem::path& path);
EncodedCorpus read_encoded_corpus(const std::filesystem::path& path);

}  // namespace ctcsum
