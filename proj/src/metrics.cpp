#include "ctcsum/metrics.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

namespace ctcsum {

RougeReport rouge_report(const TokenList& candidate, const TokenList& reference) {
  return {rouge_n(candidate, reference, 1), rouge_n(candidate, reference, 2),
          rouge_n(candidate, reference, 3), rouge_l(candidate, reference)};
}

RougeReport mean_rouge(std::span<const TokenList> candidates,
                       std::span<const TokenList> references) {
  if (candidates.size() != references.size())
    throw std::invalid_argument("mean_rouge: candidate and reference counts differ");
  RougeReport sum;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    RougeReport r = rouge_report(candidates[i], references[i]);
    sum.rouge_1 += r.rouge_1;
    sum.rouge_2 += r.rouge_2;
    sum.rouge_3 += r.rouge_3;
    sum.rouge_l += r.rouge_l;
  }
  if (!candidates.empty()) {
    const double n = static_cast<double>(candidates.size());
    sum.rouge_1 /= n;
    sum.rouge_2 /= n;
    sum.rouge_3 /= n;
    sum.rouge_l /= n;
  }
  return sum;
}

LcsSplit split_scores(std::span<const double> scores, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("split threshold must lie in [0, 1]");
  LcsSplit split;
  split.scores.assign(scores.begin(), scores.end());
  double high_sum = 0.0, low_sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > threshold) {
      split.high.push_back(i);
      high_sum += scores[i];
    } else {
      split.low.push_back(i);
      low_sum += scores[i];
    }
  }
  if (!scores.empty()) {
    split.high_fraction = static_cast<double>(split.high.size()) / scores.size();
    split.low_fraction = static_cast<double>(split.low.size()) / scores.size();
  }
  if (!split.high.empty()) split.mean_high = high_sum / split.high.size();
  if (!split.low.empty()) split.mean_low = low_sum / split.low.size();
  return split;
}

LcsSplit split_by_lcs(std::span<const HeadlineDocument> pairs, double threshold) {
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const HeadlineDocument& p : pairs) scores.push_back(lcs_order_score(p.headline, p.document));
  return split_scores(scores, threshold);
}

std::string format_table(const EvaluationReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %6s %8s %8s %8s %8s %8s %8s\n", "Group", "Pairs",
                "Share", "LCS", "ROUGE-1", "ROUGE-2", "ROUGE-3", "ROUGE-L");
  out += line;
  for (const GroupReport* g : {&report.overall, &report.high, &report.low}) {
    std::snprintf(line, sizeof line, "%-10s %6zu %7.2f%% %7.2f%% %8.2f %8.2f %8.2f %8.2f\n",
                  g->name.c_str(), g->pairs, 100.0 * g->fraction, 100.0 * g->mean_lcs,
                  100.0 * g->rouge.rouge_1, 100.0 * g->rouge.rouge_2, 100.0 * g->rouge.rouge_3,
                  100.0 * g->rouge.rouge_l);
    out += line;
  }
  std::snprintf(line, sizeof line, "LCS threshold: %.2f (high > threshold >= low)\n",
                report.threshold);
  out += line;
  return out;
}

std::string format_json(const EvaluationReport& report) {
  auto group = [](const GroupReport& g) {
    nlohmann::ordered_json j;
    j["pairs"] = g.pairs;
    j["fraction"] = g.fraction;
    j["mean_lcs"] = g.mean_lcs;
    j["rouge_1"] = g.rouge.rouge_1;
    j["rouge_2"] = g.rouge.rouge_2;
    j["rouge_3"] = g.rouge.rouge_3;
    j["rouge_l"] = g.rouge.rouge_l;
    return j;
  };
  nlohmann::ordered_json j;
  j["lcs_threshold"] = report.threshold;
  j["overall"] = group(report.overall);
  j["high"] = group(report.high);
  j["low"] = group(report.low);
  return j.dump(2);
}

}  // namespace ctcsum
