#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "ctcsum/corpus.hpp"
#include "ctcsum/headline.hpp"
#include "ctcsum/metrics.hpp"
#include "ctcsum/selfcheck.hpp"
#include "ctcsum/synthetic.hpp"
#include "ctcsum/train.hpp"

namespace ctcsum::cli {

/// Process exit codes shared by every command.
enum class ExitCode : int { ok = 0, usage = 1, data = 2, numerical = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps an in-flight exception to the exit code it should produce.
ExitCode classify(const std::exception& e);

// File names inside a prepared data directory.
inline constexpr const char* kInputVocabFile = "input.vocab";
inline constexpr const char* kOutputVocabFile = "output.vocab";
inline constexpr const char* kEncodedCorpusFile = "corpus.bin";
inline constexpr const char* kRawCorpusFile = "corpus.jsonl";
inline constexpr const char* kCheckpointFile = "model.ckpt";
inline constexpr const char* kTrainLogFile = "train_log.jsonl";

struct PrepareArgs {
  /// Raw JSONL corpus; ignored when `synthetic` is set.
  std::filesystem::path input;
  std::filesystem::path out_dir;
  TokenMode mode = TokenMode::character;
  std::size_t k = 1;
  std::size_t min_count = 1;
  /// Unset means 55 in character mode and no truncation in word mode.
  std::optional<std::size_t> truncate;
  /// Reuse existing vocabularies (e.g. to encode a held-out split).
  std::optional<std::filesystem::path> vocab_dir;
  std::optional<SyntheticConfig> synthetic;
};

/// Writes input.vocab, output.vocab and corpus.bin (plus corpus.jsonl for
/// synthetic data) into out_dir and prints pair, OOV and infeasible counts.
PrepareStats cmd_prepare(const PrepareArgs& args, std::ostream& out);

struct TrainArgs {
  std::filesystem::path data_dir;
  std::filesystem::path out_dir;
  TrainConfig config;
  std::optional<std::filesystem::path> heldout_dir;
  std::optional<std::filesystem::path> embeddings;
  /// Include wall-clock seconds in the JSON log (breaks byte-identical logs).
  bool log_timing = false;
};

struct TrainOutcome {
  TrainResult result;
  std::optional<HeldoutScore> heldout;
};

/// Trains on data_dir/corpus.bin, rewriting out_dir/model.ckpt after every
/// epoch and appending one JSON line per epoch to out_dir/train_log.jsonl.
TrainOutcome cmd_train(const TrainArgs& args, std::ostream& out);

struct SummarizeArgs {
  std::filesystem::path checkpoint;
  /// .jsonl files hold {"id"?, "document"} objects; anything else is one
  /// document per line.
  std::filesystem::path input;
  std::optional<std::filesystem::path> output;
  SummarizeOptions options;
  bool diagnostics = false;
  /// When given, must agree with the checkpoint's preprocessing.
  std::optional<TokenMode> expect_mode;
  std::optional<std::size_t> expect_k;
};

/// Writes one JSON object per document: id, headline, overlap and, with
/// diagnostics, candidates and saliency.
void cmd_summarize(const SummarizeArgs& args, std::ostream& out);

struct EvaluateArgs {
  std::filesystem::path predictions;
  std::filesystem::path references;
  double lcs_threshold = 0.4;
  TokenMode tokens = TokenMode::character;
  std::optional<std::filesystem::path> json_out;
};

/// ROUGE-1/2/3/L overall and for the high/low LCS-order groups.
EvaluationReport cmd_evaluate(const EvaluateArgs& args, std::ostream& out);

/// Returns true when every suite passed.
bool cmd_selfcheck(const SelfcheckOptions& opts, bool inject_fault, std::ostream& out);

}  // namespace ctcsum::cli
