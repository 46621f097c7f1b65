#pragma once

// Reference implementations used only by tests. They are deliberately
// naive and share no code with the library beyond plain data types.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

namespace oracle {

using Labels = std::vector<std::uint32_t>;
using Probs = std::vector<std::vector<double>>;  // T rows of L' probabilities

// A frame emits its label when it is not blank (0) and differs from the
// previous frame's label.
inline Labels collapse(const Labels& path) {
  Labels out;
  for (std::size_t t = 0; t < path.size(); ++t)
    if (path[t] != 0 && (t == 0 || path[t] != path[t - 1])) out.push_back(path[t]);
  return out;
}

// Calls fn(path, probability) for every path over y.
inline void for_each_path(const Probs& y, const std::function<void(const Labels&, double)>& fn) {
  const std::size_t frames = y.size(), labels = y.empty() ? 0 : y[0].size();
  Labels path(frames, 0);
  std::function<void(std::size_t, double)> rec = [&](std::size_t t, double p) {
    if (t == frames) {
      fn(path, p);
      return;
    }
    for (std::uint32_t n = 0; n < labels; ++n) {
      path[t] = n;
      rec(t + 1, p * y[t][n]);
    }
  };
  rec(0, 1.0);
}

// P(target | y) summed over explicit paths, in probability space.
inline double path_sum(const Probs& y, const Labels& target) {
  double total = 0.0;
  for_each_path(y, [&](const Labels& path, double p) {
    if (collapse(path) == target) total += p;
  });
  return total;
}

inline std::map<Labels, double> collapsed_masses(const Probs& y) {
  std::map<Labels, double> mass;
  for_each_path(y, [&](const Labels& path, double p) { mass[collapse(path)] += p; });
  return mass;
}

inline std::size_t lcs(const std::vector<int>& a, const std::vector<int>& b, std::size_t i = 0,
                       std::size_t j = 0) {
  static thread_local std::map<std::vector<std::size_t>, std::size_t>* memo = nullptr;
  std::map<std::vector<std::size_t>, std::size_t> local;
  const bool owner = memo == nullptr;
  if (owner) memo = &local;
  std::size_t r;
  if (i == a.size() || j == b.size()) {
    r = 0;
  } else if (auto it = memo->find({i, j}); it != memo->end()) {
    r = it->second;
  } else {
    r = a[i] == b[j] ? 1 + lcs(a, b, i + 1, j + 1)
                     : std::max(lcs(a, b, i + 1, j), lcs(a, b, i, j + 1));
    (*memo)[{i, j}] = r;
  }
  if (owner) memo = nullptr;
  return r;
}

inline Probs random_probs(std::mt19937_64& gen, std::size_t frames, std::size_t labels) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Probs y(frames, std::vector<double>(labels));
  for (auto& row : y) {
    double s = 0.0;
    for (double& v : row) s += (v = u(gen));
    for (double& v : row) v /= s;
  }
  return y;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace oracle
