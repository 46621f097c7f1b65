#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "ctcsum/checkpoint.hpp"
#include "ctcsum/ctc.hpp"
#include "ctcsum/headline.hpp"
#include "ctcsum/model.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ctcsum;

namespace {

const ModelDims kToy{7, 4, 3, 5, 2};

ModelParams random_params(const ModelDims& dims, std::uint64_t seed, double sd = 0.5) {
  ModelParams p = ModelParams::zeros(dims);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, sd);
  for (auto& t : p.tensors())
    for (double& v : t.value->values()) v = nd(gen);
  return p;
}

Checkpoint toy_checkpoint() {
  Checkpoint c;
  c.input_vocab = build_vocab(std::vector<std::string>{"甲乙丙"}, TokenMode::character, 1);
  c.output_vocab = build_vocab(std::vector<std::string>{"甲乙丙"}, TokenMode::character, 1);
  ModelDims dims{c.input_vocab.size(), c.output_vocab.size(), 3, 4, 2};
  Rng rng(5);
  c.params = ModelParams::initialize(dims, rng);
  c.step = 12;
  c.config.seed = 5;
  c.preprocess = {TokenMode::character, 2, 55};
  return c;
}

}  // namespace

TEST(Model, ShapesAndTensorOrder) {
  ModelParams p = ModelParams::zeros(kToy);
  auto ts = p.tensors();
  ASSERT_EQ(ts.size(), 1u + 2 * 2 * 3 + 2);
  EXPECT_EQ(ts.front().name, "embed");
  EXPECT_EQ(ts.back().name, "proj_bias");
  EXPECT_EQ(p.embed.rows(), 7u);
  EXPECT_EQ(p.embed.cols(), 3u);
  EXPECT_EQ(p.layers[0].forward.w_input.rows(), 3u);
  EXPECT_EQ(p.layers[1].forward.w_input.rows(), 10u);
  EXPECT_EQ(p.layers[0].backward.w_recurrent.cols(), 20u);
  EXPECT_EQ(p.proj.rows(), 10u);
  EXPECT_EQ(p.proj.cols(), 4u);
}

TEST(Model, InitializationRanges) {
  Rng rng(1);
  ModelParams p = ModelParams::initialize(kToy, rng);
  for (double v : p.embed.values()) EXPECT_LE(std::abs(v), 0.08);
  const auto& bias = p.layers[0].forward.bias;
  for (std::size_t j = 0; j < 20; ++j) EXPECT_EQ(bias(0, j), (j >= 5 && j < 10) ? 1.0 : 0.0);
}

TEST(Model, ZeroParamsGiveUniformRows) {
  ForwardResult r = forward(ModelParams::zeros(kToy), LabelSequence{1, 2, 3});
  ASSERT_EQ(r.emissions.frames(), 3u);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t n = 0; n < 4; ++n) EXPECT_DOUBLE_EQ(r.emissions(t, n), 0.25);
}

TEST(Model, ForwardDirectionIsCausal) {
  ModelParams p = random_params(kToy, 3);
  LabelSequence full{1, 4, 2, 6, 0, 3};
  ForwardResult a = forward(p, full);
  ForwardResult b = forward(p, LabelSequence(full.begin(), full.begin() + 3));
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t h = 0; h < 5; ++h)
      EXPECT_DOUBLE_EQ(a.cache.layers[0].forward.cell(t, h), b.cache.layers[0].forward.cell(t, h));
  EXPECT_NE(a.logits(0, 0), b.logits(0, 0));
}

TEST(Model, InputValidation) {
  ModelParams p = ModelParams::zeros(kToy);
  EXPECT_THROW(forward(p, LabelSequence{}), std::invalid_argument);
  EXPECT_THROW(forward(p, LabelSequence{7}), std::out_of_range);
}

TEST(Model, ZeroUpstreamGradientGivesZeroGradients) {
  ModelParams p = random_params(kToy, 4);
  ForwardResult r = forward(p, LabelSequence{1, 2, 3});
  ModelParams g = backward(p, r.cache, Matrix(3, 4));
  EXPECT_EQ(global_norm(g), 0.0);
  EXPECT_THROW(backward(p, r.cache, Matrix(2, 4)), ShapeError);
}

TEST(Model, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    ModelParams p = random_params(kToy, seed);
    LabelSequence in{1, 5, 2, 2, 6, 0};
    LabelSequence target{1, 3, 3};
    ForwardResult r = forward(p, in);
    ModelParams g = backward(p, r.cache, ctc_loss_and_grad(r.logits, target).grad_logits);
    auto loss = [&] { return ctc_loss_and_grad(forward(p, in).logits, target).loss; };
    auto pt = p.tensors();
    auto gt = g.tensors();
    std::mt19937_64 gen(seed);
    for (std::size_t ti = 0; ti < pt.size(); ++ti) {
      for (int s = 0; s < 20; ++s) {
        std::size_t idx = gen() % pt[ti].value->size();
        if (ti == 0) idx = in[gen() % in.size()] * pt[0].value->cols() + gen() % pt[0].value->cols();
        double& w = pt[ti].value->values()[idx];
        const double saved = w;
        w = saved + 1e-4;
        const double up = loss();
        w = saved - 1e-4;
        const double down = loss();
        w = saved;
        EXPECT_LT(oracle::rel_err(gt[ti].value->values()[idx], (up - down) / 2e-4), 1e-4)
            << pt[ti].name << "[" << idx << "] seed " << seed;
      }
    }
  }
}

TEST(Model, BackwardIsDeterministic) {
  ModelParams p = random_params(kToy, 8);
  ForwardResult r = forward(p, LabelSequence{1, 2, 3, 4});
  Matrix up(4, 4, 0.1);
  EXPECT_EQ(backward(p, r.cache, up), backward(p, r.cache, up));
}

TEST(Model, ClipGlobalNorm) {
  ModelParams g = random_params(kToy, 9, 3.0);
  const double before = global_norm(g);
  ASSERT_GT(before, 1.0);
  EXPECT_DOUBLE_EQ(clip_global_norm(g, 1.0), before);
  EXPECT_LE(global_norm(g), 1.0 + 1e-9);
  ModelParams h = random_params(kToy, 9, 1e-3);
  const ModelParams copy = h;
  clip_global_norm(h, 100.0);
  EXPECT_EQ(h, copy);
}

TEST(Checkpoint, RoundTripAtStoredPrecision) {
  Checkpoint c = toy_checkpoint();
  Checkpoint back = parse_checkpoint(serialize_checkpoint(c));
  EXPECT_EQ(back.params, round_to_storage(c.params));
  EXPECT_EQ(back.input_vocab, c.input_vocab);
  EXPECT_EQ(back.output_vocab, c.output_vocab);
  EXPECT_EQ(back.preprocess, c.preprocess);
  EXPECT_EQ(back.config, c.config);
  EXPECT_EQ(back.step, 12u);
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(c));
}

TEST(Checkpoint, RejectsCorruption) {
  const std::string bytes = serialize_checkpoint(toy_checkpoint());
  for (std::size_t pos : {std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    std::string bad = bytes;
    bad[pos] ^= 0x01;
    EXPECT_THROW(parse_checkpoint(bad), ChecksumError) << pos;
  }
  std::string magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(parse_checkpoint(magic), CheckpointError);
  std::string old = bytes;
  old[4] = 0;
  EXPECT_THROW(parse_checkpoint(old), UnsupportedVersionError);
  EXPECT_THROW(parse_checkpoint(bytes.substr(0, 10)), CheckpointError);
  EXPECT_THROW(parse_checkpoint(""), CheckpointError);
}

TEST(Checkpoint, Crc64CheckValue) {
  EXPECT_EQ(crc64("123456789"), 0x995DC9BBDF1939FAull);
}

TEST(Checkpoint, FileRoundTrip) {
  auto dir = test_support::scratch_dir("ckpt");
  Checkpoint c = toy_checkpoint();
  save_checkpoint(c, dir / "m.ckpt");
  EXPECT_EQ(load_checkpoint(dir / "m.ckpt").params, round_to_storage(c.params));
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), CheckpointError);
}

TEST(Summarize, EmptyAndShortDocuments) {
  Checkpoint c = toy_checkpoint();
  Summary empty = summarize_document(c, "", {});
  EXPECT_TRUE(empty.headline.empty());
  EXPECT_TRUE(empty.candidates.empty());

  // A document shorter than the window is one plain decode of the whole input.
  SummarizeOptions opts;
  opts.decode = {DecodeMethod::greedy, 1};
  Summary s = summarize_document(c, "甲乙丙乙", opts);
  ASSERT_EQ(s.candidates.size(), 1u);
  ForwardResult r = forward(c.params, k_fold(encode(tokenize("甲乙丙乙", TokenMode::character),
                                                    c.input_vocab),
                                             2));
  EXPECT_EQ(s.labels, greedy_decode(r.emissions).labels);
  EXPECT_EQ(s.saliency.size(), 8u);
  Summary again = summarize_document(c, "甲乙丙乙", opts);
  EXPECT_EQ(again.headline, s.headline);
}
