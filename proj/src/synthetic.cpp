#include "ctcsum/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "ctcsum/numerics.hpp"

namespace ctcsum {

namespace {

std::string utf8(char32_t cp) {
  std::string s;
  if (cp < 0x800) {
    s += static_cast<char>(0xC0 | (cp >> 6));
  } else {
    s += static_cast<char>(0xE0 | (cp >> 12));
    s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
  }
  s += static_cast<char>(0x80 | (cp & 0x3F));
  return s;
}

// Symbol i of the extract task, and character c of the bigram task.
std::string ideograph(std::size_t index) { return utf8(static_cast<char32_t>(0x4E00 + index)); }

void validate(const SyntheticConfig& cfg) {
  if (cfg.doc_len == 0 || cfg.vocab_size == 0)
    throw std::invalid_argument("synthetic: doc_len and vocab_size must be positive");
  if (cfg.salient_symbols == 0 || cfg.salient_symbols >= cfg.vocab_size)
    throw std::invalid_argument("synthetic: need 0 < salient_symbols < vocab_size");
  if (cfg.min_salient > cfg.max_salient || cfg.max_salient > cfg.doc_len)
    throw std::invalid_argument("synthetic: need min_salient <= max_salient <= doc_len");
  if (!cfg.allow_adjacent_repeats && cfg.salient_symbols < 2 && cfg.max_salient > 1)
    throw std::invalid_argument("synthetic: adjacent repeats unavoidable with one salient symbol");
}

}  // namespace

std::vector<RawPair> generate_synthetic(const SyntheticConfig& cfg) {
  validate(cfg);
  Rng rng = Rng(cfg.seed).split("synthetic");
  const std::size_t noise_symbols = cfg.vocab_size - cfg.salient_symbols;

  // Word surface forms for the bigram task: salient word i is spelled by
  // characters 2i and 2i+1, noise words by characters from a disjoint block.
  auto word_chars = [&](std::size_t symbol) {
    std::size_t base = symbol < cfg.salient_symbols ? 2 * symbol
                                                     : 2 * cfg.salient_symbols + 2 * symbol;
    return std::pair{ideograph(base), ideograph(base + 1)};
  };

  std::vector<RawPair> pairs;
  pairs.reserve(cfg.pairs);
  std::vector<std::size_t> positions(cfg.doc_len);
  for (std::size_t n = 0; n < cfg.pairs; ++n) {
    const std::size_t count =
        cfg.min_salient + static_cast<std::size_t>(rng.below(cfg.max_salient - cfg.min_salient + 1));
    for (std::size_t i = 0; i < cfg.doc_len; ++i) positions[i] = i;
    shuffle(positions, rng);
    std::vector<bool> salient(cfg.doc_len, false);
    for (std::size_t i = 0; i < count; ++i) salient[positions[i]] = true;

    std::vector<std::size_t> symbols(cfg.doc_len);
    for (std::size_t t = 0; t < cfg.doc_len; ++t) {
      if (!salient[t]) {
        symbols[t] = cfg.salient_symbols + static_cast<std::size_t>(rng.below(noise_symbols));
        continue;
      }
      for (;;) {
        symbols[t] = static_cast<std::size_t>(rng.below(cfg.salient_symbols));
        const bool repeat = t > 0 && salient[t - 1] && symbols[t - 1] == symbols[t];
        if (cfg.allow_adjacent_repeats || !repeat) break;
      }
    }

    RawPair pair;
    char id[32];
    std::snprintf(id, sizeof id, "syn-%06zu", n + 1);
    pair.id = id;
    for (std::size_t t = 0; t < cfg.doc_len; ++t) {
      if (cfg.task == SyntheticTask::extract) {
        pair.document += ideograph(symbols[t]);
        if (salient[t]) pair.headline += ideograph(symbols[t]);
      } else {
        auto [first, second] = word_chars(symbols[t]);
        if (t > 0) pair.document += ' ';
        pair.document += first + second;
        if (salient[t]) pair.headline += first + second;
      }
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace ctcsum
