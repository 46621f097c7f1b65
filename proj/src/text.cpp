#include "ctcsum/text.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace ctcsum {

namespace {

struct CodePoint {
  char32_t value;
  std::string_view bytes;
};

std::vector<CodePoint> decode_utf8(std::string_view text) {
  std::vector<CodePoint> out;
  out.reserve(text.size());
  std::size_t i = 0;
  auto fail = [&](const char* what) {
    throw EncodingError(std::string("invalid UTF-8 at byte ") + std::to_string(i) + ": " + what);
  };
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
      len = 1;
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      len = 2;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
      cp = lead & 0x07;
    } else {
      fail("bad lead byte");
    }
    if (i + len > text.size()) fail("truncated sequence");
    for (std::size_t k = 1; k < len; ++k) {
      const auto cont = static_cast<unsigned char>(text[i + k]);
      if ((cont & 0xC0) != 0x80) fail("bad continuation byte");
      cp = (cp << 6) | (cont & 0x3F);
    }
    static constexpr char32_t kMinForLength[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLength[len]) fail("overlong encoding");
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail("not a Unicode scalar value");
    out.push_back({cp, text.substr(i, len)});
    i += len;
  }
  return out;
}

bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f' ||
         c == 0x00A0 || c == 0x1680 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 ||
         c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

// ASCII letters plus the Latin-1 Supplement and Latin Extended-A/B letters.
bool is_latin(char32_t c) {
  if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z')) return true;
  return c >= 0x00C0 && c <= 0x024F && c != 0x00D7 && c != 0x00F7;
}

std::string tag_for_word(const std::vector<CodePoint>& cps, std::string_view word) {
  const bool all_digits =
      std::all_of(cps.begin(), cps.end(), [](const CodePoint& c) { return is_digit(c.value); });
  if (all_digits) return std::string(tags::num);
  const bool latin_or_digit = std::all_of(cps.begin(), cps.end(), [](const CodePoint& c) {
    return is_latin(c.value) || is_digit(c.value);
  });
  if (latin_or_digit) return std::string(tags::foreign);
  return std::string(word);
}

}  // namespace

std::string_view to_string(TokenMode mode) {
  return mode == TokenMode::character ? "char" : "word";
}

TokenMode parse_token_mode(std::string_view name) {
  if (name == "char" || name == "character") return TokenMode::character;
  if (name == "word") return TokenMode::word;
  throw std::invalid_argument("unknown token mode '" + std::string(name) + "'");
}

std::vector<std::string> tokenize(std::string_view text, TokenMode mode) {
  const std::vector<CodePoint> cps = decode_utf8(text);
  std::vector<std::string> tokens;

  if (mode == TokenMode::character) {
    enum class Run { none, digits, latin } run = Run::none;
    for (const CodePoint& cp : cps) {
      if (is_space(cp.value)) {
        run = Run::none;
      } else if (is_digit(cp.value)) {
        if (run != Run::digits) tokens.emplace_back(tags::num);
        run = Run::digits;
      } else if (is_latin(cp.value)) {
        if (run != Run::latin) tokens.emplace_back(tags::foreign);
        run = Run::latin;
      } else {
        tokens.emplace_back(cp.bytes);
        run = Run::none;
      }
    }
    return tokens;
  }

  std::size_t start = 0;
  std::vector<CodePoint> word;
  auto flush = [&](std::size_t end) {
    if (!word.empty()) tokens.push_back(tag_for_word(word, text.substr(start, end - start)));
    word.clear();
  };
  std::size_t offset = 0;
  for (const CodePoint& cp : cps) {
    if (is_space(cp.value)) {
      flush(offset);
    } else {
      if (word.empty()) start = offset;
      word.push_back(cp);
    }
    offset += cp.bytes.size();
  }
  flush(offset);
  return tokens;
}

Vocabulary::Vocabulary() {
  add(std::string(tags::blank));
  add(std::string(tags::unk));
  add(std::string(tags::num));
  add(std::string(tags::foreign));
}

void Vocabulary::add(std::string token) {
  if (index_.count(token)) throw std::invalid_argument("duplicate vocabulary token '" + token + "'");
  index_.emplace(token, static_cast<LabelId>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary vocab;
  if (tokens.size() < kReservedIds)
    throw std::invalid_argument("vocabulary must start with the four reserved tokens");
  for (std::size_t i = 0; i < kReservedIds; ++i)
    if (tokens[i] != vocab.tokens_[i])
      throw std::invalid_argument("vocabulary line " + std::to_string(i + 1) + " must be " +
                                  vocab.tokens_[i] + ", found '" + tokens[i] + "'");
  for (std::size_t i = kReservedIds; i < tokens.size(); ++i) vocab.add(std::move(tokens[i]));
  return vocab;
}

const std::string& Vocabulary::token(LabelId id) const {
  if (id >= tokens_.size())
    throw std::out_of_range("label id " + std::to_string(id) + " outside vocabulary of size " +
                            std::to_string(tokens_.size()));
  return tokens_[id];
}

std::optional<LabelId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

LabelId Vocabulary::id(std::string_view token) const {
  if (token == tags::blank) return kUnk;
  return find(token).value_or(kUnk);
}

Vocabulary build_vocab(std::span<const std::string> texts, TokenMode mode, std::size_t min_count) {
  if (min_count == 0) throw std::invalid_argument("min_count must be at least 1");
  struct Stat {
    std::size_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string, Stat> stats;
  std::size_t position = 0;
  for (const std::string& text : texts) {
    for (std::string& tok : tokenize(text, mode)) {
      if (tok == tags::num || tok == tags::foreign) continue;
      auto [it, inserted] = stats.try_emplace(std::move(tok));
      if (inserted) it->second.first = position;
      ++it->second.count;
      ++position;
    }
  }
  std::vector<std::pair<const std::string*, Stat>> ordered;
  for (const auto& [tok, stat] : stats)
    if (stat.count >= min_count) ordered.emplace_back(&tok, stat);
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.second.first < b.second.first;
  });
  Vocabulary vocab;
  for (const auto& entry : ordered) vocab.add(*entry.first);
  return vocab;
}

LabelSequence encode(std::span<const std::string> tokens, const Vocabulary& vocab) {
  LabelSequence ids;
  ids.reserve(tokens.size());
  for (const std::string& tok : tokens) ids.push_back(vocab.id(tok));
  return ids;
}

std::vector<std::string> id_tokens(std::span<const LabelId> ids, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (LabelId id : ids) {
    if (id == kBlank) throw std::invalid_argument("blank id cannot be rendered as text");
    if (id >= vocab.size())
      throw std::invalid_argument("label id " + std::to_string(id) + " outside vocabulary");
    out.push_back(vocab.token(id));
  }
  return out;
}

std::string decode_ids(std::span<const LabelId> ids, const Vocabulary& vocab,
                       std::string_view separator) {
  std::string out;
  bool first = true;
  for (const std::string& tok : id_tokens(ids, vocab)) {
    if (!first) out += separator;
    out += tok;
    first = false;
  }
  return out;
}

void write_vocab(const Vocabulary& vocab, std::ostream& out) {
  for (const std::string& tok : vocab.tokens()) out << tok << '\n';
}

void write_vocab(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write vocabulary file " + path.string());
  write_vocab(vocab, out);
}

Vocabulary read_vocab(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary::from_tokens(std::move(tokens));
}

Vocabulary read_vocab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read vocabulary file " + path.string());
  return read_vocab(in);
}

EmbeddingTable read_embedding_table(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t count = 0;
  if (!std::getline(in, line)) throw std::runtime_error("embedding table: missing header");
  {
    std::istringstream header(line);
    if (!(header >> count >> table.dim) || table.dim == 0)
      throw std::runtime_error("embedding table: header must be 'count dim'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<double> values(table.dim);
    for (double& v : values)
      if (!(fields >> v))
        throw std::runtime_error("embedding table line " + std::to_string(line_no) +
                                 ": expected " + std::to_string(table.dim) + " values");
    table.rows[token] = std::move(values);
  }
  if (table.rows.size() != count)
    throw std::runtime_error("embedding table: header promises " + std::to_string(count) +
                             " rows, found " + std::to_string(table.rows.size()));
  return table;
}

EmbeddingTable read_embedding_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read embedding table " + path.string());
  return read_embedding_table(in);
}

}  // namespace ctcsum
