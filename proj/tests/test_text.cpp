#include <gtest/gtest.h>

#include <sstream>

#include "ctcsum/corpus.hpp"
#include "ctcsum/synthetic.hpp"
#include "ctcsum/text.hpp"

using namespace ctcsum;
using Tokens = std::vector<std::string>;

TEST(Tokenize, CharacterMode) {
  EXPECT_EQ(tokenize("AB12 甲", TokenMode::character), (Tokens{"<foreign>", "<num>", "甲"}));
  EXPECT_EQ(tokenize("", TokenMode::character), Tokens{});
  EXPECT_EQ(tokenize("甲乙", TokenMode::character), (Tokens{"甲", "乙"}));
  EXPECT_EQ(tokenize("甲 Café乙", TokenMode::character), (Tokens{"甲", "<foreign>", "乙"}));
  EXPECT_EQ(tokenize("甲　乙", TokenMode::character), (Tokens{"甲", "乙"}));
  EXPECT_EQ(tokenize("，。", TokenMode::character), (Tokens{"，", "。"}));
}

TEST(Tokenize, WordMode) {
  EXPECT_EQ(tokenize("台北 2017 年 NBA A3 好", TokenMode::word),
            (Tokens{"台北", "<num>", "年", "<foreign>", "<foreign>", "好"}));
  EXPECT_EQ(tokenize("  \t ", TokenMode::word), Tokens{});
}

TEST(Tokenize, RejectsInvalidUtf8) {
  EXPECT_THROW(tokenize("\xe4\xb8", TokenMode::character), EncodingError);
  EXPECT_THROW(tokenize("\xff", TokenMode::word), EncodingError);
  EXPECT_THROW(tokenize("\xc0\x80", TokenMode::character), EncodingError);
}

TEST(Vocabulary, ReservedIds) {
  Vocabulary v;
  ASSERT_EQ(v.size(), kReservedIds);
  EXPECT_EQ(v.token(kBlank), "<blank>");
  EXPECT_EQ(v.id("<num>"), kNum);
  EXPECT_EQ(v.id("<foreign>"), kForeign);
  EXPECT_EQ(v.id("nope"), kUnk);
  EXPECT_THROW(v.token(99), std::out_of_range);
  EXPECT_THROW(Vocabulary::from_tokens({"a", "b"}), std::invalid_argument);
  EXPECT_THROW(Vocabulary::from_tokens({"<blank>", "<unk>", "<num>", "<foreign>", "x", "x"}),
               std::invalid_argument);
}

TEST(BuildVocab, MinCountAndOrder) {
  std::vector<std::string> corpus{"甲甲乙"};
  Vocabulary v2 = build_vocab(corpus, TokenMode::character, 2);
  EXPECT_TRUE(v2.find("甲"));
  EXPECT_FALSE(v2.find("乙"));
  std::vector<std::string> c2{"乙丙甲", "甲甲"};
  Vocabulary v1 = build_vocab(c2, TokenMode::character, 1);
  EXPECT_EQ(v1.tokens(), (Tokens{"<blank>", "<unk>", "<num>", "<foreign>", "甲", "乙", "丙"}));
  EXPECT_EQ(build_vocab(std::vector<std::string>{}, TokenMode::character, 1).size(), kReservedIds);
}

TEST(KFold, RepeatsEachElement) {
  EXPECT_EQ(k_fold(std::vector<int>{1, 2}, 2), (std::vector<int>{1, 1, 2, 2}));
  EXPECT_EQ(k_fold(std::vector<int>{3, 1, 4}, 1), (std::vector<int>{3, 1, 4}));
  EXPECT_TRUE(k_fold(std::vector<int>{}, 3).empty());
  EXPECT_THROW(k_fold(std::vector<int>{1}, 0), std::invalid_argument);
  for (std::size_t k = 1; k < 5; ++k) EXPECT_EQ(k_fold(std::vector<int>(7), k).size(), 7 * k);
}

TEST(Encode, RoundTripAndFallbacks) {
  Vocabulary v = build_vocab(std::vector<std::string>{"甲乙丙"}, TokenMode::character, 1);
  Tokens toks{"甲", "丙", "乙"};
  LabelSequence ids = encode(toks, v);
  EXPECT_EQ(id_tokens(ids, v), toks);
  EXPECT_EQ(decode_ids(ids, v), "甲丙乙");
  EXPECT_EQ(encode(Tokens{"丁"}, v), LabelSequence{kUnk});
  EXPECT_EQ(decode_ids(LabelSequence{kNum, 4}, v), "<num>甲");
  EXPECT_EQ(decode_ids(LabelSequence{4, 5}, v, " "), "甲 乙");
  EXPECT_THROW(decode_ids(LabelSequence{kBlank}, v), std::invalid_argument);
  EXPECT_THROW(decode_ids(LabelSequence{100}, v), std::invalid_argument);
}

TEST(VocabFile, RoundTrip) {
  Vocabulary v = build_vocab(std::vector<std::string>{"甲乙 abc 丙"}, TokenMode::character, 1);
  std::stringstream ss;
  write_vocab(v, ss);
  EXPECT_EQ(read_vocab(ss), v);
}

TEST(EmbeddingTable, Parses) {
  std::istringstream in("2 3\n甲 0.1 0.2 0.3\n乙 1 2 3\n");
  EmbeddingTable t = read_embedding_table(in);
  EXPECT_EQ(t.dim, 3u);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows.at("乙"), (std::vector<double>{1, 2, 3}));
}

TEST(CorpusJsonl, ReadsAndReportsLineNumbers) {
  std::istringstream good(
      R"({"id":"x","document":"甲乙","headline":"甲"})"
      "\n\n"
      R"({"document":"丙","headline":"丙"})"
      "\n");
  auto pairs = read_corpus_jsonl(good);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].id, "x");
  EXPECT_EQ(pairs[1].id, "3");
  std::istringstream missing(
      R"({"document":"甲","headline":"甲"})"
      "\n"
      R"({"document":"乙"})"
      "\n");
  try {
    read_corpus_jsonl(missing);
    FAIL() << "expected CorpusFormatError";
  } catch (const CorpusFormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream broken("{not json\n");
  EXPECT_THROW(read_corpus_jsonl(broken), CorpusFormatError);
}

TEST(Corpus, EncodeCountsInfeasibleAndOov) {
  std::vector<RawPair> raw{{"1", "甲乙丙丁", "甲丙"}, {"2", "甲乙", "乙乙戊"}};
  Vocabulary in = build_vocab(std::vector<std::string>{"甲乙丙丁"}, TokenMode::character, 1);
  Vocabulary out = build_vocab(std::vector<std::string>{"甲丙乙"}, TokenMode::character, 1);
  PrepareStats stats;
  PreprocessConfig cfg{TokenMode::character, 2, 0};
  EncodedCorpus enc = encode_corpus(raw, in, out, cfg, &stats);
  ASSERT_EQ(enc.pairs.size(), 2u);
  EXPECT_EQ(enc.pairs[0].document.size(), 8u);
  EXPECT_EQ(enc.pairs[1].headline.size(), 2u);  // 戊 dropped
  EXPECT_EQ(stats.headline_oov, 1u);
  EXPECT_EQ(stats.infeasible, 0u);
  cfg.k = 1;
  cfg.truncate = 1;
  encode_corpus(raw, in, out, cfg, &stats);
  EXPECT_EQ(stats.infeasible, 2u);
}

TEST(Corpus, PrepareDocumentTruncatesBeforeFolding) {
  Vocabulary in = build_vocab(std::vector<std::string>{"甲乙丙"}, TokenMode::character, 1);
  PreprocessConfig cfg{TokenMode::character, 2, 2};
  EXPECT_EQ(prepare_document("甲乙丙", in, cfg), (LabelSequence{4, 4, 5, 5}));
}

TEST(Synthetic, DeterministicAndWellFormed) {
  SyntheticConfig cfg;
  cfg.pairs = 200;
  auto a = generate_synthetic(cfg), b = generate_synthetic(cfg);
  ASSERT_EQ(a.size(), 200u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].document, b[i].document);
    auto doc = tokenize(a[i].document, TokenMode::character);
    auto head = tokenize(a[i].headline, TokenMode::character);
    EXPECT_EQ(doc.size(), 20u);
    EXPECT_GE(head.size(), 3u);
    EXPECT_LE(head.size(), 8u);
    // The headline is a subsequence of the document.
    std::size_t j = 0;
    for (const auto& tok : doc)
      if (j < head.size() && tok == head[j]) ++j;
    EXPECT_EQ(j, head.size());
  }
  cfg.task = SyntheticTask::bigram;
  auto w = generate_synthetic(cfg);
  for (const auto& p : w) EXPECT_EQ(tokenize(p.headline, TokenMode::character).size() % 2, 0u);
}
