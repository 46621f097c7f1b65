#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ctcsum {

/// Log-domain probability. Values are <= 0; -infinity is probability zero.
using LogProb = double;

inline constexpr LogProb kLogZero = -std::numeric_limits<double>::infinity();

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v);
  std::string shape_string() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// log(sum(exp(v))) with max subtraction. Empty input or all -inf gives -inf.
LogProb log_sum_exp(std::span<const double> values);
LogProb log_sum_exp(double a, double b);
LogProb log_sum_exp(double a, double b, double c);

Matrix softmax_rows(const Matrix& logits);
Matrix log_softmax_rows(const Matrix& logits);

/// a * b. Throws ShapeError naming both shapes on mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);
/// a^T * b.
Matrix matmul_at(const Matrix& a, const Matrix& b);
/// a * b^T.
Matrix matmul_bt(const Matrix& a, const Matrix& b);

/// out += x^T (row vector) * w, i.e. out[j] += sum_i x[i] * w(i, j).
void accumulate_vec_mat(std::span<const double> x, const Matrix& w, std::span<double> out);

/// Deterministic random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Distributions are implemented here rather than taken from
/// <random> because the standard distributions are not portable across
/// library implementations. Child streams for independent purposes (init,
/// shuffle, synthetic data) are derived with `derive_seed`, which mixes the
/// parent seed with an FNV-1a hash of the purpose name through SplitMix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();

  static std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose);
  Rng split(std::string_view purpose) const { return Rng(derive_seed(seed_, purpose)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

template <class T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace ctcsum
