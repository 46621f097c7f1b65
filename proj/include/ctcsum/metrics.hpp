#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctcsum {

/// Length of the longest common subsequence, O(|a|*|b|) time, O(|b|) space.
template <class T>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// ROUGE-N recall: clipped matching n-grams over reference n-grams.
/// A reference shorter than n scores 0.
template <class T>
double rouge_n(std::span<const T> candidate, std::span<const T> reference, std::size_t n) {
  if (n == 0) throw std::invalid_argument("rouge_n: n must be at least 1");
  if (reference.size() < n) return 0.0;
  std::map<std::vector<T>, std::size_t> ref_counts;
  for (std::size_t i = 0; i + n <= reference.size(); ++i)
    ++ref_counts[std::vector<T>(reference.begin() + i, reference.begin() + i + n)];
  std::size_t matched = 0;
  for (std::size_t i = 0; i + n <= candidate.size(); ++i) {
    auto it = ref_counts.find(std::vector<T>(candidate.begin() + i, candidate.begin() + i + n));
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++matched;
    }
  }
  return static_cast<double>(matched) / static_cast<double>(reference.size() - n + 1);
}

/// ROUGE-L recall: LCS length over reference length; empty reference scores 0.
template <class T>
double rouge_l(std::span<const T> candidate, std::span<const T> reference) {
  if (reference.empty()) return 0.0;
  return static_cast<double>(lcs_length(candidate, reference)) /
         static_cast<double>(reference.size());
}

/// How much of the headline appears, in order, in the document:
/// LCS length over headline length. Throws std::invalid_argument on an
/// empty headline.
template <class T>
double lcs_order_score(std::span<const T> headline, std::span<const T> document) {
  if (headline.empty()) throw std::invalid_argument("lcs_order_score: headline is empty");
  return static_cast<double>(lcs_length(headline, document)) /
         static_cast<double>(headline.size());
}

// Container conveniences so call sites need not spell out spans.
template <class T>
double rouge_n(const std::vector<T>& c, const std::vector<T>& r, std::size_t n) {
  return rouge_n(std::span<const T>(c), std::span<const T>(r), n);
}
template <class T>
double rouge_l(const std::vector<T>& c, const std::vector<T>& r) {
  return rouge_l(std::span<const T>(c), std::span<const T>(r));
}
template <class T>
std::size_t lcs_length(const std::vector<T>& a, const std::vector<T>& b) {
  return lcs_length(std::span<const T>(a), std::span<const T>(b));
}
template <class T>
double lcs_order_score(const std::vector<T>& h, const std::vector<T>& d) {
  return lcs_order_score(std::span<const T>(h), std::span<const T>(d));
}

struct RougeReport {
  double rouge_1 = 0.0;
  double rouge_2 = 0.0;
  double rouge_3 = 0.0;
  double rouge_l = 0.0;
};

using TokenList = std::vector<std::string>;

RougeReport rouge_report(const TokenList& candidate, const TokenList& reference);
/// Per-pair scores averaged over the given pairs; zero for an empty set.
RougeReport mean_rouge(std::span<const TokenList> candidates, std::span<const TokenList> references);

struct LcsSplit {
  std::vector<std::size_t> high;  ///< indices with score > threshold
  std::vector<std::size_t> low;   ///< indices with score <= threshold
  std::vector<double> scores;
  double high_fraction = 0.0;
  double low_fraction = 0.0;
  double mean_high = 0.0;  ///< mean score in the high group, 0 if empty
  double mean_low = 0.0;
};

/// Splits precomputed order scores. Throws std::invalid_argument for a
/// threshold outside [0, 1].
LcsSplit split_scores(std::span<const double> scores, double threshold);

struct HeadlineDocument {
  TokenList headline;
  TokenList document;
};

/// Scores each pair with lcs_order_score(headline, document) and splits.
LcsSplit split_by_lcs(std::span<const HeadlineDocument> pairs, double threshold);

struct GroupReport {
  std::string name;
  std::size_t pairs = 0;
  double fraction = 0.0;
  double mean_lcs = 0.0;
  RougeReport rouge;
};

struct EvaluationReport {
  double threshold = 0.0;
  GroupReport overall;
  GroupReport high;
  GroupReport low;
};

/// Plain-text table: one row per group, ROUGE columns x100 with two decimals.
std::string format_table(const EvaluationReport& report);
/// JSON text of the same report (scores in [0, 1]).
std::string format_json(const EvaluationReport& report);

}  // namespace ctcsum
