#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ctcsum/corpus.hpp"
#include "ctcsum/decode.hpp"
#include "ctcsum/model.hpp"

namespace ctcsum {

enum class OptimizerKind { sgd, adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::size_t d_emb = 32;
  std::size_t d_hidden = 64;
  std::size_t layers = 2;
  /// Worker threads for per-example gradients. Results do not depend on it:
  /// per-example gradients are always reduced in batch order.
  std::size_t threads = 1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochReport {
  std::size_t epoch = 0;  ///< 1-based
  double mean_loss = 0.0;
  std::size_t examples = 0;
  std::size_t skipped_infeasible = 0;
  std::uint64_t step = 0;  ///< optimizer steps taken so far
  double wall_seconds = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochReport> epochs;
  std::uint64_t steps = 0;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(const EpochReport&, const ModelParams&)>;

/// Mini-batch training on the CTC loss. Each epoch shuffles the feasible
/// pairs, averages per-example gradients within a batch, clips to
/// clip_norm and applies the optimizer. Infeasible pairs are skipped and
/// counted. Throws TrainingError when every pair is infeasible or when the
/// loss or gradient stops being finite (the message names the step).
TrainResult train(ModelParams initial, std::span<const CorpusPair> corpus, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Initializes from cfg.seed and trains.
TrainResult train(const ModelDims& dims, std::span<const CorpusPair> corpus,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

ModelDims dims_for(const TrainConfig& cfg, std::size_t input_vocab, std::size_t output_labels);

/// Mean loss over feasible pairs without updating anything.
double mean_loss(const ModelParams& params, std::span<const CorpusPair> corpus);

struct HeldoutScore {
  std::size_t pairs = 0;
  double exact_match = 0.0;
  double rouge_1 = 0.0;
};

/// Decodes every document and compares against its headline.
HeldoutScore score_heldout(const ModelParams& params, std::span<const CorpusPair> corpus,
                           const DecodeConfig& decode_cfg);

}  // namespace ctcsum
