#include "ctcsum/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ctcsum {

namespace {

constexpr double kInitRange = 0.08;
constexpr double kForgetBias = 1.0;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LstmDirection zero_direction(std::size_t in, std::size_t hidden) {
  return {Matrix(in, 4 * hidden), Matrix(hidden, 4 * hidden), Matrix(1, 4 * hidden)};
}

void fill_uniform(Matrix& m, Rng& rng) {
  for (double& v : m.values()) v = rng.uniform(-kInitRange, kInitRange);
}

void add_row_vector(Matrix& m, const Matrix& row) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto dst = m.row(r);
    auto src = row.row(0);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
  }
}

Matrix column_sums(const Matrix& m) {
  Matrix out(1, m.cols());
  auto dst = out.row(0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
  }
  return out;
}

// Time step preceding `t` in processing order, or -1 at the sequence start.
long previous_step(std::size_t t, std::size_t frames, bool reverse) {
  if (reverse) return t + 1 < frames ? static_cast<long>(t + 1) : -1;
  return t > 0 ? static_cast<long>(t - 1) : -1;
}

void run_direction(const LstmDirection& p, const Matrix& input, bool reverse,
                   DirectionCache& cache) {
  const std::size_t frames = input.rows();
  const std::size_t hidden = p.w_recurrent.rows();
  Matrix pre = matmul(input, p.w_input);
  add_row_vector(pre, p.bias);

  cache.gates = Matrix(frames, 4 * hidden);
  cache.cell = Matrix(frames, hidden);
  cache.hidden = Matrix(frames, hidden);

  for (std::size_t step = 0; step < frames; ++step) {
    const std::size_t t = reverse ? frames - 1 - step : step;
    const long prev = previous_step(t, frames, reverse);
    auto z = cache.gates.row(t);
    std::copy(pre.row(t).begin(), pre.row(t).end(), z.begin());
    if (prev >= 0) accumulate_vec_mat(cache.hidden.row(prev), p.w_recurrent, z);

    auto c = cache.cell.row(t);
    auto h = cache.hidden.row(t);
    for (std::size_t k = 0; k < hidden; ++k) {
      const double i = sigmoid(z[k]);
      const double f = sigmoid(z[hidden + k]);
      const double g = std::tanh(z[2 * hidden + k]);
      const double o = sigmoid(z[3 * hidden + k]);
      z[k] = i;
      z[hidden + k] = f;
      z[2 * hidden + k] = g;
      z[3 * hidden + k] = o;
      const double c_prev = prev >= 0 ? cache.cell(prev, k) : 0.0;
      c[k] = f * c_prev + i * g;
      h[k] = o * std::tanh(c[k]);
    }
  }
}

// Accumulates parameter gradients into `grad` and returns d loss / d input.
Matrix backward_direction(const LstmDirection& p, const Matrix& input, bool reverse,
                          const DirectionCache& cache, const Matrix& d_hidden,
                          LstmDirection& grad) {
  const std::size_t frames = input.rows();
  const std::size_t hidden = p.w_recurrent.rows();
  Matrix dz(frames, 4 * hidden);
  Matrix h_prev(frames, hidden);
  std::vector<double> dh_rec(hidden, 0.0);
  std::vector<double> dc_rec(hidden, 0.0);

  for (std::size_t step = 0; step < frames; ++step) {
    // Walk opposite to the processing order.
    const std::size_t t = reverse ? step : frames - 1 - step;
    const long prev = previous_step(t, frames, reverse);
    auto gates = cache.gates.row(t);
    auto dzt = dz.row(t);
    for (std::size_t k = 0; k < hidden; ++k) {
      const double i = gates[k];
      const double f = gates[hidden + k];
      const double g = gates[2 * hidden + k];
      const double o = gates[3 * hidden + k];
      const double c_prev = prev >= 0 ? cache.cell(prev, k) : 0.0;
      const double tanh_c = std::tanh(cache.cell(t, k));
      const double dh = d_hidden(t, k) + dh_rec[k];
      const double d_o = dh * tanh_c;
      const double dc = dc_rec[k] + dh * o * (1.0 - tanh_c * tanh_c);
      dzt[k] = dc * g * i * (1.0 - i);
      dzt[hidden + k] = dc * c_prev * f * (1.0 - f);
      dzt[2 * hidden + k] = dc * i * (1.0 - g * g);
      dzt[3 * hidden + k] = d_o * o * (1.0 - o);
      dc_rec[k] = dc * f;
    }
    if (prev >= 0) {
      auto hp = cache.hidden.row(prev);
      std::copy(hp.begin(), hp.end(), h_prev.row(t).begin());
      for (std::size_t k = 0; k < hidden; ++k) {
        auto wr = p.w_recurrent.row(k);
        double s = 0.0;
        for (std::size_t j = 0; j < wr.size(); ++j) s += dzt[j] * wr[j];
        dh_rec[k] = s;
      }
    } else {
      std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
    }
  }

  grad.w_input = matmul_at(input, dz);
  grad.w_recurrent = matmul_at(h_prev, dz);
  grad.bias = column_sums(dz);
  return matmul_bt(dz, p.w_input);
}

}  // namespace

ModelParams ModelParams::zeros(const ModelDims& dims) {
  if (dims.input_vocab == 0 || dims.output_labels < 2 || dims.d_emb == 0 ||
      dims.d_hidden == 0 || dims.layers == 0)
    throw std::invalid_argument("model dimensions must be positive and L' >= 2");
  ModelParams p;
  p.dims = dims;
  p.embed = Matrix(dims.input_vocab, dims.d_emb);
  for (std::size_t l = 0; l < dims.layers; ++l) {
    const std::size_t in = l == 0 ? dims.d_emb : 2 * dims.d_hidden;
    p.layers.push_back({zero_direction(in, dims.d_hidden), zero_direction(in, dims.d_hidden)});
  }
  p.proj = Matrix(2 * dims.d_hidden, dims.output_labels);
  p.proj_bias = Matrix(1, dims.output_labels);
  return p;
}

ModelParams ModelParams::initialize(const ModelDims& dims, Rng& rng) {
  ModelParams p = zeros(dims);
  for (auto& t : p.tensors())
    if (!t.vector) fill_uniform(*t.value, rng);
  for (LstmLayer& layer : p.layers)
    for (LstmDirection* dir : {&layer.forward, &layer.backward})
      for (std::size_t k = 0; k < dims.d_hidden; ++k) dir->bias(0, dims.d_hidden + k) = kForgetBias;
  return p;
}

std::vector<ModelParams::Tensor> ModelParams::tensors() {
  std::vector<Tensor> out;
  out.push_back({"embed", &embed, false});
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "lstm" + std::to_string(l) + ".";
    for (auto [name, dir] : {std::pair{"fwd", &layers[l].forward}, std::pair{"bwd", &layers[l].backward}}) {
      out.push_back({prefix + name + ".w_input", &dir->w_input, false});
      out.push_back({prefix + name + ".w_recurrent", &dir->w_recurrent, false});
      out.push_back({prefix + name + ".bias", &dir->bias, true});
    }
  }
  out.push_back({"proj", &proj, false});
  out.push_back({"proj_bias", &proj_bias, true});
  return out;
}

std::vector<ModelParams::ConstTensor> ModelParams::tensors() const {
  std::vector<ConstTensor> out;
  for (const Tensor& t : const_cast<ModelParams*>(this)->tensors())
    out.push_back({t.name, t.value, t.vector});
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += t.value->size();
  return n;
}

std::size_t apply_embedding_table(ModelParams& params, const Vocabulary& vocab,
                                  const EmbeddingTable& table) {
  if (table.dim != params.dims.d_emb)
    throw ShapeError("embedding table has width " + std::to_string(table.dim) +
                     " but the model expects " + std::to_string(params.dims.d_emb));
  std::size_t copied = 0;
  for (std::size_t id = kReservedIds; id < vocab.size() && id < params.embed.rows(); ++id) {
    auto it = table.rows.find(vocab.token(static_cast<LabelId>(id)));
    if (it == table.rows.end()) continue;
    std::copy(it->second.begin(), it->second.end(), params.embed.row(id).begin());
    ++copied;
  }
  return copied;
}

ForwardResult forward(const ModelParams& params, std::span<const LabelId> input_ids) {
  if (input_ids.empty()) throw std::invalid_argument("forward: input sequence is empty");
  const std::size_t frames = input_ids.size();
  const std::size_t hidden = params.dims.d_hidden;

  ForwardCache cache;
  cache.input_ids.assign(input_ids.begin(), input_ids.end());
  Matrix x(frames, params.dims.d_emb);
  for (std::size_t t = 0; t < frames; ++t) {
    if (input_ids[t] >= params.embed.rows())
      throw std::out_of_range("input id " + std::to_string(input_ids[t]) +
                              " outside input vocabulary of size " +
                              std::to_string(params.embed.rows()));
    auto src = params.embed.row(input_ids[t]);
    std::copy(src.begin(), src.end(), x.row(t).begin());
  }

  for (const LstmLayer& layer : params.layers) {
    LayerCache lc;
    lc.input = std::move(x);
    run_direction(layer.forward, lc.input, false, lc.forward);
    run_direction(layer.backward, lc.input, true, lc.backward);
    x = Matrix(frames, 2 * hidden);
    for (std::size_t t = 0; t < frames; ++t) {
      auto dst = x.row(t);
      auto f = lc.forward.hidden.row(t);
      auto b = lc.backward.hidden.row(t);
      std::copy(f.begin(), f.end(), dst.begin());
      std::copy(b.begin(), b.end(), dst.begin() + hidden);
    }
    cache.layers.push_back(std::move(lc));
  }
  cache.top = std::move(x);

  Matrix logits = matmul(cache.top, params.proj);
  add_row_vector(logits, params.proj_bias);
  EmissionMatrix emissions(softmax_rows(logits));
  return ForwardResult{std::move(logits), std::move(emissions), std::move(cache)};
}

ModelParams backward(const ModelParams& params, const ForwardCache& cache,
                     const Matrix& grad_logits) {
  const std::size_t frames = cache.input_ids.size();
  if (grad_logits.rows() != frames || grad_logits.cols() != params.dims.output_labels ||
      cache.layers.size() != params.layers.size())
    throw ShapeError("backward: logit gradient " + grad_logits.shape_string() +
                     " does not match the cached forward pass (" + std::to_string(frames) +
                     "x" + std::to_string(params.dims.output_labels) + ")");
  const std::size_t hidden = params.dims.d_hidden;
  ModelParams grad = ModelParams::zeros(params.dims);

  grad.proj = matmul_at(cache.top, grad_logits);
  grad.proj_bias = column_sums(grad_logits);
  Matrix d_out = matmul_bt(grad_logits, params.proj);

  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const LayerCache& lc = cache.layers[l];
    Matrix d_fwd(frames, hidden), d_bwd(frames, hidden);
    for (std::size_t t = 0; t < frames; ++t) {
      auto src = d_out.row(t);
      std::copy(src.begin(), src.begin() + hidden, d_fwd.row(t).begin());
      std::copy(src.begin() + hidden, src.end(), d_bwd.row(t).begin());
    }
    Matrix d_in = backward_direction(params.layers[l].forward, lc.input, false, lc.forward, d_fwd,
                                     grad.layers[l].forward);
    Matrix d_in_b = backward_direction(params.layers[l].backward, lc.input, true, lc.backward,
                                       d_bwd, grad.layers[l].backward);
    auto a = d_in.values();
    auto b = d_in_b.values();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    d_out = std::move(d_in);
  }

  for (std::size_t t = 0; t < frames; ++t) {
    auto dst = grad.embed.row(cache.input_ids[t]);
    auto src = d_out.row(t);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
  return grad;
}

void add_scaled(ModelParams& dst, const ModelParams& src, double factor) {
  auto d = dst.tensors();
  auto s = src.tensors();
  if (d.size() != s.size()) throw ShapeError("add_scaled: parameter structure mismatch");
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto dv = d[i].value->values();
    auto sv = s[i].value->values();
    if (dv.size() != sv.size()) throw ShapeError("add_scaled: tensor " + d[i].name + " mismatch");
    for (std::size_t j = 0; j < dv.size(); ++j) dv[j] += factor * sv[j];
  }
}

void scale(ModelParams& params, double factor) {
  for (auto& t : params.tensors())
    for (double& v : t.value->values()) v *= factor;
}

double global_norm(const ModelParams& params) {
  double sum = 0.0;
  for (const auto& t : params.tensors())
    for (double v : t.value->values()) sum += v * v;
  return std::sqrt(sum);
}

double clip_global_norm(ModelParams& grads, double clip_norm) {
  const double norm = global_norm(grads);
  if (norm > clip_norm) scale(grads, clip_norm / norm);
  return norm;
}

bool all_finite(const ModelParams& params) {
  for (const auto& t : params.tensors())
    for (double v : t.value->values())
      if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace ctcsum
