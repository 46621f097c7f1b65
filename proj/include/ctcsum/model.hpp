#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ctcsum/emission.hpp"
#include "ctcsum/numerics.hpp"
#include "ctcsum/text.hpp"

namespace ctcsum {

struct ModelDims {
  std::size_t input_vocab = 0;
  std::size_t output_labels = 0;  ///< L' including the blank
  std::size_t d_emb = 32;
  std::size_t d_hidden = 64;
  std::size_t layers = 2;

  bool operator==(const ModelDims&) const = default;
};

/// One LSTM direction. Gates are laid out [input, forget, cell, output] along
/// the 4H columns; the pre-activation is x * w_input + h * w_recurrent + bias.
struct LstmDirection {
  Matrix w_input;      ///< in x 4H
  Matrix w_recurrent;  ///< H x 4H
  Matrix bias;         ///< 1 x 4H

  bool operator==(const LstmDirection&) const = default;
};

struct LstmLayer {
  LstmDirection forward;
  LstmDirection backward;

  bool operator==(const LstmLayer&) const = default;
};

/// Embedding -> stacked bidirectional LSTM -> linear projection to L' logits.
/// The same shape doubles as the container for gradients and optimizer state.
struct ModelParams {
  ModelDims dims;
  Matrix embed;      ///< input_vocab x d_emb
  std::vector<LstmLayer> layers;
  Matrix proj;       ///< 2H x L'
  Matrix proj_bias;  ///< 1 x L'

  /// All-zero parameters of the given shape.
  static ModelParams zeros(const ModelDims& dims);
  /// Weights uniform in [-0.08, 0.08], biases zero except forget gates at 1.
  static ModelParams initialize(const ModelDims& dims, Rng& rng);

  struct Tensor {
    std::string name;
    Matrix* value;
    bool vector;  ///< stored as rank 1
  };
  struct ConstTensor {
    std::string name;
    const Matrix* value;
    bool vector;
  };
  /// Tensors in declaration order: embed, then per layer the forward and
  /// backward (w_input, w_recurrent, bias), then proj and proj_bias.
  std::vector<Tensor> tensors();
  std::vector<ConstTensor> tensors() const;

  std::size_t parameter_count() const;
  bool operator==(const ModelParams&) const = default;
};

/// Copies rows of `table` into the embedding for tokens present in `vocab`.
/// Returns how many rows were copied. Throws ShapeError if the table width
/// differs from d_emb.
std::size_t apply_embedding_table(ModelParams& params, const Vocabulary& vocab,
                                  const EmbeddingTable& table);

/// Activations of one LSTM direction over a sequence, indexed by time.
struct DirectionCache {
  Matrix gates;  ///< T x 4H, post-activation
  Matrix cell;   ///< T x H
  Matrix hidden; ///< T x H
};

struct LayerCache {
  Matrix input;  ///< T x in
  DirectionCache forward;
  DirectionCache backward;
};

struct ForwardCache {
  LabelSequence input_ids;
  std::vector<LayerCache> layers;
  Matrix top;  ///< T x 2H, concatenated top-layer states
};

struct ForwardResult {
  Matrix logits;  ///< T x L'
  EmissionMatrix emissions;
  ForwardCache cache;
};

/// One emission row per input element. Throws std::out_of_range for ids
/// outside the input vocabulary and std::invalid_argument for empty input.
ForwardResult forward(const ModelParams& params, std::span<const LabelId> input_ids);

/// Exact BPTT gradients of a scalar loss whose gradient w.r.t. the logits
/// is `grad_logits`. Throws ShapeError when grad_logits does not match.
ModelParams backward(const ModelParams& params, const ForwardCache& cache,
                     const Matrix& grad_logits);

// Whole-parameter arithmetic used by the optimizer.
void add_scaled(ModelParams& dst, const ModelParams& src, double scale);
void scale(ModelParams& params, double factor);
double global_norm(const ModelParams& params);
/// Rescales so the global norm is at most clip_norm. Returns the pre-clip norm.
double clip_global_norm(ModelParams& grads, double clip_norm);
bool all_finite(const ModelParams& params);

}  // namespace ctcsum
