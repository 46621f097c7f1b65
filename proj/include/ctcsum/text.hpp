#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctcsum/emission.hpp"

namespace ctcsum {

enum class TokenMode { character, word };

std::string_view to_string(TokenMode mode);
/// Accepts "char", "character" and "word".
TokenMode parse_token_mode(std::string_view name);

namespace tags {
inline constexpr std::string_view blank = "<blank>";
inline constexpr std::string_view unk = "<unk>";
inline constexpr std::string_view num = "<num>";
inline constexpr std::string_view foreign = "<foreign>";
}  // namespace tags

inline constexpr LabelId kUnk = 1;
inline constexpr LabelId kNum = 2;
inline constexpr LabelId kForeign = 3;
inline constexpr std::size_t kReservedIds = 4;

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Character mode: one token per Unicode scalar, whitespace dropped, each
/// run of ASCII digits becomes "<num>" and each run of Latin letters becomes
/// "<foreign>". Word mode: split on whitespace, then a token made only of
/// digits becomes "<num>" and one made of Latin letters (digits allowed)
/// becomes "<foreign>". Throws EncodingError on invalid UTF-8.
std::vector<std::string> tokenize(std::string_view text, TokenMode mode);

/// Token <-> id bijection. Ids 0..3 are always <blank>, <unk>, <num>,
/// <foreign>; tokenization never produces the blank.
class Vocabulary {
 public:
  Vocabulary();

  /// Builds from an ordered token list whose first four entries are the
  /// reserved tokens. Throws std::invalid_argument otherwise or on duplicates.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(LabelId id) const;
  std::optional<LabelId> find(std::string_view token) const;
  /// Maps tags to their reserved ids and unknown tokens to <unk>.
  LabelId id(std::string_view token) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, LabelId> index_;

  friend Vocabulary build_vocab(std::span<const std::string>, TokenMode, std::size_t);
};

/// Tokens with frequency >= min_count, ordered by descending frequency and
/// then by first occurrence, placed after the reserved ids.
Vocabulary build_vocab(std::span<const std::string> texts, TokenMode mode, std::size_t min_count);

/// [w1..wN] -> [w1 x k, ..., wN x k]. Throws std::invalid_argument for k == 0.
template <class T>
std::vector<T> k_fold(std::span<const T> input, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k_fold: k must be at least 1");
  std::vector<T> out;
  out.reserve(input.size() * k);
  for (const T& v : input) out.insert(out.end(), k, v);
  return out;
}

template <class T>
std::vector<T> k_fold(const std::vector<T>& input, std::size_t k) {
  return k_fold(std::span<const T>(input), k);
}

LabelSequence encode(std::span<const std::string> tokens, const Vocabulary& vocab);
/// Renders ids as their tokens joined by `separator`. Throws
/// std::invalid_argument on the blank id or an out-of-range id.
std::string decode_ids(std::span<const LabelId> ids, const Vocabulary& vocab,
                       std::string_view separator = "");
std::vector<std::string> id_tokens(std::span<const LabelId> ids, const Vocabulary& vocab);

/// One token per line; line number is the id.
void write_vocab(const Vocabulary& vocab, std::ostream& out);
void write_vocab(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary read_vocab(std::istream& in);
Vocabulary read_vocab(const std::filesystem::path& path);

/// Optional pretrained embeddings: "count dim" header then "token v1 .. vdim".
struct EmbeddingTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> rows;
};

EmbeddingTable read_embedding_table(std::istream& in);
EmbeddingTable read_embedding_table(const std::filesystem::path& path);

}  // namespace ctcsum
