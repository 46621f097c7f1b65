#include "ctcsum/corpus.hpp"

#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include <nlohmann/json.hpp>

#include "ctcsum/ctc.hpp"
#include "detail/binary_io.hpp"

namespace ctcsum {

namespace detail {

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace detail

namespace {

constexpr std::string_view kCorpusMagic = "CTCE";
constexpr std::uint32_t kCorpusVersion = 1;

std::string string_field(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw CorpusFormatError(line, std::string("missing \"") + key + "\" field");
  if (!it->is_string())
    throw CorpusFormatError(line, std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

}  // namespace

std::vector<RawPair> read_corpus_jsonl(std::istream& in, bool require_headline) {
  std::vector<RawPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw CorpusFormatError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw CorpusFormatError(line_no, "expected a JSON object");
    RawPair pair;
    pair.document = string_field(obj, "document", line_no);
    if (require_headline || obj.contains("headline"))
      pair.headline = string_field(obj, "headline", line_no);
    if (auto it = obj.find("id"); it != obj.end()) {
      pair.id = it->is_string() ? it->get<std::string>() : it->dump();
    } else {
      pair.id = std::to_string(line_no);
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<RawPair> read_corpus_jsonl(const std::filesystem::path& path, bool require_headline) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read corpus " + path.string());
  return read_corpus_jsonl(in, require_headline);
}

void write_corpus_jsonl(std::span<const RawPair> pairs, std::ostream& out) {
  for (const RawPair& p : pairs) {
    nlohmann::ordered_json obj;
    obj["id"] = p.id;
    obj["document"] = p.document;
    obj["headline"] = p.headline;
    out << obj.dump() << '\n';
  }
}

LabelSequence prepare_document(std::string_view document, const Vocabulary& input_vocab,
                               const PreprocessConfig& cfg) {
  std::vector<std::string> tokens = tokenize(document, cfg.mode);
  if (cfg.truncate > 0 && tokens.size() > cfg.truncate) tokens.resize(cfg.truncate);
  return k_fold(encode(tokens, input_vocab), cfg.k);
}

EncodedCorpus encode_corpus(std::span<const RawPair> raw, const Vocabulary& input_vocab,
                            const Vocabulary& output_vocab, const PreprocessConfig& cfg,
                            PrepareStats* stats) {
  PrepareStats local;
  EncodedCorpus corpus;
  corpus.preprocess = cfg;
  corpus.pairs.reserve(raw.size());
  for (const RawPair& r : raw) {
    std::vector<std::string> doc_tokens = tokenize(r.document, cfg.mode);
    if (cfg.truncate > 0 && doc_tokens.size() > cfg.truncate) doc_tokens.resize(cfg.truncate);
    CorpusPair pair;
    pair.id = r.id;
    LabelSequence doc = encode(doc_tokens, input_vocab);
    local.input_tokens += doc.size();
    for (LabelId id : doc) local.input_oov += id == kUnk;
    pair.document = k_fold(doc, cfg.k);
    for (const std::string& tok : tokenize(r.headline, TokenMode::character)) {
      LabelId id = output_vocab.id(tok);
      if (id == kUnk) {
        ++local.headline_oov;
        continue;
      }
      pair.headline.push_back(id);
    }
    if (pair.document.empty() || !is_feasible(pair.document.size(), pair.headline))
      ++local.infeasible;
    corpus.pairs.push_back(std::move(pair));
  }
  local.pairs = corpus.pairs.size();
  if (stats) *stats = local;
  return corpus;
}

void write_encoded_corpus(const EncodedCorpus& corpus, const std::filesystem::path& path) {
  nlohmann::json meta;
  meta["mode"] = std::string(to_string(corpus.preprocess.mode));
  meta["k"] = corpus.preprocess.k;
  meta["truncate"] = corpus.preprocess.truncate;
  meta["pairs"] = corpus.pairs.size();
  auto& ids = meta["ids"] = nlohmann::json::array();
  for (const CorpusPair& p : corpus.pairs) ids.push_back(p.id);
  const std::string meta_text = meta.dump();

  std::string out(kCorpusMagic);
  detail::put_u32(out, kCorpusVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(meta_text.size()));
  out += meta_text;
  auto put_seq = [&](const LabelSequence& seq) {
    detail::put_u32(out, static_cast<std::uint32_t>(seq.size()));
    for (LabelId id : seq) detail::put_u32(out, id);
  };
  for (const CorpusPair& p : corpus.pairs) {
    put_seq(p.document);
    put_seq(p.headline);
  }
  detail::write_file_bytes(path.string(), out);
}

EncodedCorpus read_encoded_corpus(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file_bytes(path.string());
  detail::ByteReader in(bytes);
  try {
    if (in.take(4) != kCorpusMagic) throw std::runtime_error("not an encoded corpus (bad magic)");
    if (std::uint32_t v = in.u32(); v != kCorpusVersion)
      throw std::runtime_error("unsupported encoded corpus version " + std::to_string(v));
    const auto meta = nlohmann::json::parse(in.take(in.u32()));
    EncodedCorpus corpus;
    corpus.preprocess.mode = parse_token_mode(meta.at("mode").get<std::string>());
    corpus.preprocess.k = meta.at("k").get<std::size_t>();
    corpus.preprocess.truncate = meta.at("truncate").get<std::size_t>();
    const auto& ids = meta.at("ids");
    const std::size_t count = meta.at("pairs").get<std::size_t>();
    if (ids.size() != count) throw std::runtime_error("encoded corpus id list length mismatch");
    auto get_seq = [&] {
      LabelSequence seq(in.u32());
      for (LabelId& id : seq) id = in.u32();
      return seq;
    };
    corpus.pairs.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      corpus.pairs[i].id = ids[i].get<std::string>();
      corpus.pairs[i].document = get_seq();
      corpus.pairs[i].headline = get_seq();
    }
    if (in.remaining() != 0) throw std::runtime_error("trailing bytes after encoded corpus");
    return corpus;
  } catch (const detail::TruncatedInput& e) {
    throw std::runtime_error(path.string() + ": truncated encoded corpus: " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": bad encoded corpus metadata: " + e.what());
  }
}

}  // namespace ctcsum
