#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ctcsum/numerics.hpp"

namespace ctcsum {

/// Output label id. 0 is the CTC blank; real labels are 1..L.
using LabelId = std::uint32_t;
using LabelSequence = std::vector<LabelId>;

inline constexpr LabelId kBlank = 0;

/// T x L' per-frame label distributions. Every row sums to 1 within 1e-9.
class EmissionMatrix {
 public:
  /// Throws ShapeError when empty or when a row is not a distribution.
  explicit EmissionMatrix(Matrix probs);

  std::size_t frames() const { return probs_.rows(); }
  std::size_t labels() const { return probs_.cols(); }
  double operator()(std::size_t t, LabelId n) const { return probs_(t, n); }
  std::span<const double> row(std::size_t t) const { return probs_.row(t); }
  const Matrix& matrix() const { return probs_; }

 private:
  Matrix probs_;
};

}  // namespace ctcsum
