#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

#include "ctcsum/emission.hpp"
#include "ctcsum/numerics.hpp"

namespace ctcsum {

class CtcError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Target contains the blank id.
class InvalidTargetError : public CtcError {
 public:
  using CtcError::CtcError;
};

/// Target label id >= L'.
class OutOfVocabularyError : public CtcError {
 public:
  using CtcError::CtcError;
};

/// The target cannot be produced by any path of the given length.
class InfeasibleTargetError : public CtcError {
 public:
  using CtcError::CtcError;
};

/// Brute-force enumeration would exceed its size guard.
class SizeGuardError : public CtcError {
 public:
  using CtcError::CtcError;
};

/// [z1..zU] -> [-, z1, -, z2, -, ..., zU, -]
LabelSequence extend_target(std::span<const LabelId> target);

/// Smallest T for which some path collapses to `target`: U plus one extra
/// frame for every adjacent pair of equal labels.
std::size_t min_frames(std::span<const LabelId> target);

inline bool is_feasible(std::size_t frames, std::span<const LabelId> target) {
  return frames >= min_frames(target);
}

/// log P(target | y) by the forward recursion over the blank-extended
/// target. Infeasible targets give -inf.
LogProb ctc_log_prob(const EmissionMatrix& y, std::span<const LabelId> target);

struct CtcResult {
  double loss = 0.0;      ///< -log_prob
  Matrix grad_logits;     ///< d loss / d logits, T x L'
  LogProb log_prob = 0.0;
};

/// Loss and exact gradient with respect to pre-softmax logits, using
/// forward-backward in log domain. Throws InfeasibleTargetError when no
/// path of length T collapses to the target.
CtcResult ctc_loss_and_grad(const Matrix& logits, std::span<const LabelId> target);

/// Reference implementation: enumerates all L'^T paths, collapses each and
/// sums the probability of those equal to the target. Throws SizeGuardError
/// when L'^T > kBruteForceLimit.
LogProb ctc_log_prob_bruteforce(const EmissionMatrix& y, std::span<const LabelId> target);

inline constexpr std::size_t kBruteForceLimit = 10'000'000;

namespace testing {

/// Fault-injection hook for the self-check harness: when enabled, the
/// skip transition over a blank is also allowed between equal labels, which
/// breaks the recursion on targets with adjacent repeats.
void set_transition_fault(bool enabled);
bool transition_fault();

class ScopedTransitionFault {
 public:
  ScopedTransitionFault() { set_transition_fault(true); }
  ~ScopedTransitionFault() { set_transition_fault(false); }
  ScopedTransitionFault(const ScopedTransitionFault&) = delete;
  ScopedTransitionFault& operator=(const ScopedTransitionFault&) = delete;
};

}  // namespace testing

}  // namespace ctcsum
