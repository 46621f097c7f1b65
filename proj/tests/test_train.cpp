#include <gtest/gtest.h>

#include "ctcsum/train.hpp"

using namespace ctcsum;

namespace {

std::vector<CorpusPair> tiny_corpus() {
  return {{"a", {4, 5, 6, 7, 5}, {1, 2}},
          {"b", {5, 7, 4, 6}, {2}},
          {"c", {6, 6, 4, 5, 7, 4}, {3, 1, 3}},
          {"d", {7, 4}, {1, 2, 3}}};  // infeasible
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.d_emb = 4;
  cfg.d_hidden = 6;
  cfg.batch_size = 2;
  cfg.epochs = 3;
  cfg.learning_rate = 0.01;
  cfg.seed = 7;
  return cfg;
}

const ModelDims kDims{8, 4, 4, 6, 2};

}  // namespace

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.clip_norm = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.learning_rate = -1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_EQ(parse_optimizer("sgd"), OptimizerKind::sgd);
  EXPECT_THROW(parse_optimizer("rmsprop"), std::invalid_argument);
}

TEST(Train, SameSeedSameTrace) {
  auto corpus = tiny_corpus();
  TrainResult a = train(kDims, corpus, small_config());
  TrainResult b = train(kDims, corpus, small_config());
  ASSERT_EQ(a.epochs.size(), 3u);
  for (std::size_t e = 0; e < 3; ++e) EXPECT_EQ(a.epochs[e].mean_loss, b.epochs[e].mean_loss);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.epochs[0].skipped_infeasible, 1u);
  EXPECT_EQ(a.epochs[0].examples, 3u);
  EXPECT_EQ(a.steps, 6u);
}

TEST(Train, ThreadCountDoesNotChangeResults) {
  auto corpus = tiny_corpus();
  TrainConfig cfg = small_config();
  TrainResult one = train(kDims, corpus, cfg);
  cfg.threads = 3;
  TrainResult three = train(kDims, corpus, cfg);
  EXPECT_EQ(one.params, three.params);
}

TEST(Train, MemorizesOnePair) {
  std::vector<CorpusPair> corpus{{"x", {4, 5, 6, 7, 4, 5}, {1, 3, 2}}};
  TrainConfig cfg = small_config();
  cfg.batch_size = 1;
  cfg.epochs = 300;
  cfg.learning_rate = 0.03;
  TrainResult r = train(kDims, corpus, cfg);
  EXPECT_LT(r.epochs.back().mean_loss, 0.01);
  EXPECT_LT(r.epochs.back().mean_loss, r.epochs.front().mean_loss);
  HeldoutScore s = score_heldout(r.params, corpus, {DecodeMethod::greedy, 1});
  EXPECT_EQ(s.exact_match, 1.0);
  EXPECT_EQ(s.rouge_1, 1.0);
}

TEST(Train, SgdAlsoReducesLoss) {
  auto corpus = tiny_corpus();
  TrainConfig cfg = small_config();
  cfg.optimizer = OptimizerKind::sgd;
  cfg.learning_rate = 0.1;
  cfg.epochs = 30;
  TrainResult r = train(kDims, corpus, cfg);
  EXPECT_LT(r.epochs.back().mean_loss, r.epochs.front().mean_loss);
}

TEST(Train, CallbackSeesEveryEpoch) {
  auto corpus = tiny_corpus();
  std::vector<std::size_t> seen;
  train(kDims, corpus, small_config(),
        [&](const EpochReport& r, const ModelParams&) { seen.push_back(r.epoch); });
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(Train, RejectsUnusableCorpus) {
  std::vector<CorpusPair> none;
  EXPECT_THROW(train(kDims, none, small_config()), TrainingError);
  std::vector<CorpusPair> infeasible{{"d", {7}, {1, 2}}};
  EXPECT_THROW(train(kDims, infeasible, small_config()), TrainingError);
}

TEST(Train, DimsFromConfig) {
  TrainConfig cfg = small_config();
  EXPECT_EQ(dims_for(cfg, 8, 4), kDims);
}
