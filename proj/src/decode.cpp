#include "ctcsum/decode.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ctcsum {

LabelSequence collapse(std::span<const LabelId> path) {
  LabelSequence out;
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (t > 0 && path[t] == path[t - 1]) continue;
    if (path[t] != kBlank) out.push_back(path[t]);
  }
  return out;
}

LabelSequence best_path(const EmissionMatrix& y) {
  LabelSequence path(y.frames());
  for (std::size_t t = 0; t < y.frames(); ++t) {
    auto row = y.row(t);
    // max_element returns the first maximum: lowest id wins ties.
    path[t] = static_cast<LabelId>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return path;
}

DecodeResult greedy_decode(const EmissionMatrix& y) {
  LabelSequence path = best_path(y);
  DecodeResult result;
  result.method = DecodeMethod::greedy;
  for (std::size_t t = 0; t < path.size(); ++t) result.score += std::log(y(t, path[t]));
  result.labels = collapse(path);
  return result;
}

namespace {

struct PrefixMass {
  LogProb ends_blank = kLogZero;
  LogProb ends_label = kLogZero;
  LogProb total() const { return log_sum_exp(ends_blank, ends_label); }
};

using Beam = std::map<LabelSequence, PrefixMass>;

void add_mass(LogProb& slot, LogProb v) { slot = log_sum_exp(slot, v); }

Beam prune(Beam candidates, std::size_t width) {
  if (candidates.size() <= width) return candidates;
  std::vector<std::pair<LogProb, const LabelSequence*>> ranked;
  ranked.reserve(candidates.size());
  for (const auto& [prefix, mass] : candidates) ranked.emplace_back(mass.total(), &prefix);
  // Higher mass first; std::map order (lexicographic) breaks ties.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  Beam kept;
  for (std::size_t i = 0; i < width; ++i) {
    auto node = candidates.extract(*ranked[i].second);
    kept.insert(std::move(node));
  }
  return kept;
}

}  // namespace

DecodeResult beam_decode(const EmissionMatrix& y, std::size_t beam_width) {
  if (beam_width == 0) throw std::invalid_argument("beam_width must be at least 1");

  Beam beam;
  beam[{}] = PrefixMass{0.0, kLogZero};

  for (std::size_t t = 0; t < y.frames(); ++t) {
    Beam next;
    const double log_blank = std::log(y(t, kBlank));
    for (const auto& [prefix, mass] : beam) {
      const LogProb total = mass.total();
      if (total == kLogZero) continue;
      if (log_blank != kLogZero) add_mass(next[prefix].ends_blank, total + log_blank);
      for (LabelId c = 1; c < y.labels(); ++c) {
        const double lp = std::log(y(t, c));
        if (lp == kLogZero) continue;
        LabelSequence extended = prefix;
        extended.push_back(c);
        if (!prefix.empty() && prefix.back() == c) {
          // Repeat without an intervening blank stays on the same prefix.
          add_mass(next[prefix].ends_label, mass.ends_label + lp);
          add_mass(next[extended].ends_label, mass.ends_blank + lp);
        } else {
          add_mass(next[extended].ends_label, total + lp);
        }
      }
    }
    beam = prune(std::move(next), beam_width);
  }

  DecodeResult result;
  result.method = DecodeMethod::beam;
  result.score = kLogZero;
  bool found = false;
  for (const auto& [prefix, mass] : beam) {
    const LogProb total = mass.total();
    if (!found || total > result.score) {
      result.labels = prefix;
      result.score = total;
      found = true;
    }
  }
  return result;
}

DecodeResult decode(const EmissionMatrix& y, const DecodeConfig& cfg) {
  return cfg.method == DecodeMethod::greedy ? greedy_decode(y) : beam_decode(y, cfg.beam_width);
}

std::vector<double> blank_saliency(const EmissionMatrix& y) {
  std::vector<double> out(y.frames());
  for (std::size_t t = 0; t < y.frames(); ++t) out[t] = 1.0 - y(t, kBlank);
  return out;
}

}  // namespace ctcsum
