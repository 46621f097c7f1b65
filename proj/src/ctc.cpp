#include "ctcsum/ctc.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "ctcsum/decode.hpp"

namespace ctcsum {

namespace {

std::atomic<bool> g_transition_fault{false};

void validate_target(std::span<const LabelId> target, std::size_t label_count) {
  for (std::size_t u = 0; u < target.size(); ++u) {
    if (target[u] == kBlank)
      throw InvalidTargetError("target position " + std::to_string(u) + " holds the blank id");
    if (target[u] >= label_count)
      throw OutOfVocabularyError("target label " + std::to_string(target[u]) +
                                 " out of range for " + std::to_string(label_count) + " labels");
  }
}

// Skip transition s-2 -> s is allowed into a non-blank slot whose label
// differs from the one two slots back.
bool skip_allowed(const LabelSequence& ext, std::size_t s) {
  if (s < 2 || ext[s] == kBlank) return false;
  return ext[s] != ext[s - 2] || g_transition_fault.load(std::memory_order_relaxed);
}

Matrix forward_variables(const Matrix& log_y, const LabelSequence& ext) {
  const std::size_t frames = log_y.rows();
  const std::size_t slots = ext.size();
  Matrix alpha(frames, slots, kLogZero);
  alpha(0, 0) = log_y(0, ext[0]);
  if (slots > 1) alpha(0, 1) = log_y(0, ext[1]);
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t s = 0; s < slots; ++s) {
      double acc = alpha(t - 1, s);
      if (s >= 1) acc = log_sum_exp(acc, alpha(t - 1, s - 1));
      if (skip_allowed(ext, s)) acc = log_sum_exp(acc, alpha(t - 1, s - 2));
      alpha(t, s) = acc == kLogZero ? kLogZero : acc + log_y(t, ext[s]);
    }
  }
  return alpha;
}

Matrix backward_variables(const Matrix& log_y, const LabelSequence& ext) {
  const std::size_t frames = log_y.rows();
  const std::size_t slots = ext.size();
  Matrix beta(frames, slots, kLogZero);
  beta(frames - 1, slots - 1) = log_y(frames - 1, ext[slots - 1]);
  if (slots > 1) beta(frames - 1, slots - 2) = log_y(frames - 1, ext[slots - 2]);
  for (std::size_t t = frames - 1; t-- > 0;) {
    for (std::size_t s = 0; s < slots; ++s) {
      double acc = beta(t + 1, s);
      if (s + 1 < slots) acc = log_sum_exp(acc, beta(t + 1, s + 1));
      if (s + 2 < slots && skip_allowed(ext, s + 2)) acc = log_sum_exp(acc, beta(t + 1, s + 2));
      beta(t, s) = acc == kLogZero ? kLogZero : acc + log_y(t, ext[s]);
    }
  }
  return beta;
}

LogProb total_from_alpha(const Matrix& alpha) {
  const std::size_t last = alpha.rows() - 1;
  const std::size_t slots = alpha.cols();
  double total = alpha(last, slots - 1);
  if (slots > 1) total = log_sum_exp(total, alpha(last, slots - 2));
  return total;
}

}  // namespace

EmissionMatrix::EmissionMatrix(Matrix probs) : probs_(std::move(probs)) {
  if (probs_.rows() == 0 || probs_.cols() == 0)
    throw ShapeError("emission matrix must have at least one frame and one label, got " +
                     probs_.shape_string());
  for (std::size_t t = 0; t < probs_.rows(); ++t) {
    double sum = 0.0;
    for (double p : probs_.row(t)) {
      if (!(p >= 0.0) || !std::isfinite(p))
        throw ShapeError("emission frame " + std::to_string(t) + " has an invalid probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ShapeError("emission frame " + std::to_string(t) + " sums to " + std::to_string(sum));
  }
}

LabelSequence extend_target(std::span<const LabelId> target) {
  for (std::size_t u = 0; u < target.size(); ++u)
    if (target[u] == kBlank)
      throw InvalidTargetError("target position " + std::to_string(u) + " holds the blank id");
  LabelSequence ext;
  ext.reserve(2 * target.size() + 1);
  ext.push_back(kBlank);
  for (LabelId z : target) {
    ext.push_back(z);
    ext.push_back(kBlank);
  }
  return ext;
}

std::size_t min_frames(std::span<const LabelId> target) {
  std::size_t n = target.size();
  for (std::size_t u = 1; u < target.size(); ++u)
    if (target[u] == target[u - 1]) ++n;
  return n;
}

LogProb ctc_log_prob(const EmissionMatrix& y, std::span<const LabelId> target) {
  validate_target(target, y.labels());
  if (!is_feasible(y.frames(), target)) return kLogZero;
  Matrix log_y(y.frames(), y.labels());
  for (std::size_t t = 0; t < y.frames(); ++t)
    for (std::size_t n = 0; n < y.labels(); ++n) log_y(t, n) = std::log(y(t, n));
  return total_from_alpha(forward_variables(log_y, extend_target(target)));
}

CtcResult ctc_loss_and_grad(const Matrix& logits, std::span<const LabelId> target) {
  if (logits.rows() == 0 || logits.cols() == 0)
    throw ShapeError("ctc logits must be non-empty, got " + logits.shape_string());
  validate_target(target, logits.cols());
  if (!is_feasible(logits.rows(), target))
    throw InfeasibleTargetError("target needs " + std::to_string(min_frames(target)) +
                                " frames but only " + std::to_string(logits.rows()) +
                                " are available");

  const LabelSequence ext = extend_target(target);
  const Matrix log_y = log_softmax_rows(logits);
  const Matrix alpha = forward_variables(log_y, ext);
  const Matrix beta = backward_variables(log_y, ext);
  const LogProb log_prob = total_from_alpha(alpha);
  if (log_prob == kLogZero)
    throw InfeasibleTargetError("target has zero probability under the given logits");

  CtcResult result;
  result.log_prob = log_prob;
  result.loss = -log_prob;
  result.grad_logits = Matrix(logits.rows(), logits.cols());

  std::vector<double> occupancy(logits.cols());
  for (std::size_t t = 0; t < logits.rows(); ++t) {
    std::fill(occupancy.begin(), occupancy.end(), kLogZero);
    for (std::size_t s = 0; s < ext.size(); ++s) {
      double v = alpha(t, s) + beta(t, s);
      if (v == kLogZero) continue;
      occupancy[ext[s]] = log_sum_exp(occupancy[ext[s]], v - log_y(t, ext[s]));
    }
    auto grad = result.grad_logits.row(t);
    for (std::size_t k = 0; k < grad.size(); ++k) {
      double posterior = occupancy[k] == kLogZero ? 0.0 : std::exp(occupancy[k] - log_prob);
      grad[k] = std::exp(log_y(t, k)) - posterior;
    }
  }
  return result;
}

LogProb ctc_log_prob_bruteforce(const EmissionMatrix& y, std::span<const LabelId> target) {
  validate_target(target, y.labels());
  const std::size_t frames = y.frames();
  const std::size_t labels = y.labels();
  double count = 1.0;
  for (std::size_t t = 0; t < frames; ++t) {
    count *= static_cast<double>(labels);
    if (count > static_cast<double>(kBruteForceLimit))
      throw SizeGuardError("brute force over " + std::to_string(labels) + "^" +
                           std::to_string(frames) + " paths exceeds the size guard");
  }
  if (target.size() > frames) return kLogZero;

  const LabelSequence wanted(target.begin(), target.end());
  LabelSequence path(frames, 0);
  double total = 0.0;
  for (;;) {
    if (collapse(path) == wanted) {
      double p = 1.0;
      for (std::size_t t = 0; t < frames; ++t) p *= y(t, path[t]);
      total += p;
    }
    std::size_t t = 0;
    while (t < frames && ++path[t] == labels) path[t++] = 0;
    if (t == frames) break;
  }
  return total > 0.0 ? std::log(total) : kLogZero;
}

namespace testing {

void set_transition_fault(bool enabled) { g_transition_fault.store(enabled); }
bool transition_fault() { return g_transition_fault.load(); }

}  // namespace testing

}  // namespace ctcsum
