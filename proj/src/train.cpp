#include "ctcsum/train.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "ctcsum/ctc.hpp"
#include "ctcsum/metrics.hpp"

namespace ctcsum {

namespace {

class Optimizer {
 public:
  Optimizer(const ModelParams& shape, const TrainConfig& cfg)
      : cfg_(cfg) {
    if (cfg.optimizer == OptimizerKind::adam) {
      first_ = ModelParams::zeros(shape.dims);
      second_ = ModelParams::zeros(shape.dims);
    }
  }

  void step(ModelParams& params, const ModelParams& grad) {
    if (cfg_.optimizer == OptimizerKind::sgd) {
      add_scaled(params, grad, -cfg_.learning_rate);
      return;
    }
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    auto p = params.tensors();
    auto g = grad.tensors();
    auto m = first_.tensors();
    auto v = second_.tensors();
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto pv = p[i].value->values();
      auto gv = g[i].value->values();
      auto mv = m[i].value->values();
      auto vv = v[i].value->values();
      for (std::size_t j = 0; j < pv.size(); ++j) {
        mv[j] = kBeta1 * mv[j] + (1.0 - kBeta1) * gv[j];
        vv[j] = kBeta2 * vv[j] + (1.0 - kBeta2) * gv[j] * gv[j];
        pv[j] -= cfg_.learning_rate * (mv[j] / c1) / (std::sqrt(vv[j] / c2) + kEps);
      }
    }
  }

 private:
  TrainConfig cfg_;
  ModelParams first_;
  ModelParams second_;
  std::uint64_t t_ = 0;
};

bool trainable(const CorpusPair& pair) {
  return !pair.document.empty() && is_feasible(pair.document.size(), pair.headline);
}

struct ExampleGrad {
  double loss = 0.0;
  ModelParams grad;
};

ExampleGrad example_gradient(const ModelParams& params, const CorpusPair& pair) {
  ForwardResult fwd = forward(params, pair.document);
  CtcResult ctc = ctc_loss_and_grad(fwd.logits, pair.headline);
  return {ctc.loss, backward(params, fwd.cache, ctc.grad_logits)};
}

void compute_batch(const ModelParams& params, std::span<const CorpusPair* const> batch,
                   std::size_t threads, std::vector<ExampleGrad>& out) {
  out.resize(batch.size());
  auto work = [&](std::size_t worker) {
    for (std::size_t i = worker; i < batch.size(); i += threads)
      out[i] = example_gradient(params, *batch[i]);
  };
  if (threads <= 1 || batch.size() <= 1) {
    for (std::size_t i = 0; i < batch.size(); ++i) out[i] = example_gradient(params, *batch[i]);
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
}

}  // namespace

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid training config: ") + what);
  };
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate must be positive");
  require(batch_size > 0, "batch_size must be positive");
  require(epochs > 0, "epochs must be positive");
  require(clip_norm > 0.0, "clip_norm must be positive");
  require(d_emb > 0 && d_hidden > 0 && layers > 0, "model dimensions must be positive");
  require(threads > 0, "threads must be positive");
}

ModelDims dims_for(const TrainConfig& cfg, std::size_t input_vocab, std::size_t output_labels) {
  return ModelDims{input_vocab, output_labels, cfg.d_emb, cfg.d_hidden, cfg.layers};
}

TrainResult train(const ModelDims& dims, std::span<const CorpusPair> corpus,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  Rng init_rng = Rng(cfg.seed).split("init");
  return train(ModelParams::initialize(dims, init_rng), corpus, cfg, on_epoch);
}

TrainResult train(ModelParams initial, std::span<const CorpusPair> corpus, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (corpus.empty()) throw TrainingError("training corpus is empty");

  std::vector<const CorpusPair*> usable;
  for (const CorpusPair& pair : corpus)
    if (trainable(pair)) usable.push_back(&pair);
  const std::size_t skipped = corpus.size() - usable.size();
  if (usable.empty())
    throw TrainingError("all " + std::to_string(corpus.size()) +
                        " training pairs are infeasible under the CTC length constraint");

  TrainResult result;
  result.params = std::move(initial);
  Optimizer optimizer(result.params, cfg);
  Rng shuffle_rng = Rng(cfg.seed).split("shuffle");
  std::vector<ExampleGrad> per_example;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    shuffle(usable, shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < usable.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(usable.size(), begin + cfg.batch_size);
      std::span<const CorpusPair* const> batch(usable.data() + begin, end - begin);
      compute_batch(result.params, batch, cfg.threads, per_example);

      ModelParams grad = ModelParams::zeros(result.params.dims);
      double batch_loss = 0.0;
      for (const ExampleGrad& ex : per_example) {
        add_scaled(grad, ex.grad, 1.0);
        batch_loss += ex.loss;
      }
      const double inv = 1.0 / static_cast<double>(batch.size());
      scale(grad, inv);
      ++result.steps;
      if (!std::isfinite(batch_loss) || !all_finite(grad))
        throw TrainingError("training diverged at step " + std::to_string(result.steps) +
                            " (epoch " + std::to_string(epoch) + "): non-finite loss or gradient");
      clip_global_norm(grad, cfg.clip_norm);
      optimizer.step(result.params, grad);
      loss_sum += batch_loss;
    }
    EpochReport report;
    report.epoch = epoch;
    report.examples = usable.size();
    report.mean_loss = loss_sum / static_cast<double>(usable.size());
    report.skipped_infeasible = skipped;
    report.step = result.steps;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.epochs.push_back(report);
    if (on_epoch) on_epoch(report, result.params);
  }
  return result;
}

double mean_loss(const ModelParams& params, std::span<const CorpusPair> corpus) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const CorpusPair& pair : corpus) {
    if (!trainable(pair)) continue;
    ForwardResult fwd = forward(params, pair.document);
    sum += ctc_loss_and_grad(fwd.logits, pair.headline).loss;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

HeldoutScore score_heldout(const ModelParams& params, std::span<const CorpusPair> corpus,
                           const DecodeConfig& decode_cfg) {
  HeldoutScore score;
  double exact = 0.0, rouge = 0.0;
  for (const CorpusPair& pair : corpus) {
    if (pair.document.empty()) continue;
    ForwardResult fwd = forward(params, pair.document);
    LabelSequence out = decode(fwd.emissions, decode_cfg).labels;
    exact += out == pair.headline ? 1.0 : 0.0;
    rouge += rouge_n<LabelId>(out, pair.headline, 1);
    ++score.pairs;
  }
  if (score.pairs > 0) {
    score.exact_match = exact / static_cast<double>(score.pairs);
    score.rouge_1 = rouge / static_cast<double>(score.pairs);
  }
  return score;
}

}  // namespace ctcsum
