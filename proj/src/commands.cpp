#include "ctcsum/commands.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "ctcsum/checkpoint.hpp"
#include "ctcsum/ctc.hpp"

namespace ctcsum::cli {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

struct PreparedData {
  Vocabulary input_vocab;
  Vocabulary output_vocab;
  EncodedCorpus corpus;
};

PreparedData load_prepared(const fs::path& dir) {
  for (const char* name : {kInputVocabFile, kOutputVocabFile, kEncodedCorpusFile})
    if (!fs::exists(dir / name))
      throw DataError("prepared data directory " + dir.string() + " lacks " + name);
  try {
    return {read_vocab(dir / kInputVocabFile), read_vocab(dir / kOutputVocabFile),
            read_encoded_corpus(dir / kEncodedCorpusFile)};
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
}

// Predictions are {"id", "headline"} objects.
std::map<std::string, std::string> read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read predictions " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      const auto& id = obj.at("id");
      out[id.is_string() ? id.get<std::string>() : id.dump()] = obj.at("headline").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw CorpusFormatError(line_no, std::string("bad prediction: ") + e.what());
    }
  }
  return out;
}

GroupReport group_report(const std::string& name, const std::vector<std::size_t>& members,
                         const std::vector<TokenList>& candidates,
                         const std::vector<TokenList>& references,
                         const std::vector<double>& lcs, std::size_t total) {
  GroupReport g;
  g.name = name;
  g.pairs = members.size();
  g.fraction = total == 0 ? 0.0 : static_cast<double>(members.size()) / total;
  std::vector<TokenList> c, r;
  double lcs_sum = 0.0;
  for (std::size_t i : members) {
    c.push_back(candidates[i]);
    r.push_back(references[i]);
    lcs_sum += lcs[i];
  }
  g.mean_lcs = members.empty() ? 0.0 : lcs_sum / members.size();
  g.rouge = mean_rouge(c, r);
  return g;
}

}  // namespace

ExitCode classify(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e))
    return ExitCode::usage;
  if (dynamic_cast<const NumericalError*>(&e) || dynamic_cast<const TrainingError*>(&e) ||
      dynamic_cast<const CtcError*>(&e))
    return ExitCode::numerical;
  return ExitCode::data;
}

PrepareStats cmd_prepare(const PrepareArgs& args, std::ostream& out) {
  if (args.k == 0) throw UsageError("--k must be at least 1");
  if (args.min_count == 0) throw UsageError("--min-count must be at least 1");
  ensure_dir(args.out_dir);

  std::vector<RawPair> raw;
  if (args.synthetic) {
    raw = generate_synthetic(*args.synthetic);
    std::ofstream jsonl(args.out_dir / kRawCorpusFile, std::ios::binary);
    write_corpus_jsonl(raw, jsonl);
  } else {
    raw = read_corpus_jsonl(args.input);
  }

  PreprocessConfig prep;
  prep.mode = args.mode;
  prep.k = args.k;
  prep.truncate = args.truncate.value_or(args.mode == TokenMode::character ? kDefaultCharTruncate : 0);

  Vocabulary input_vocab, output_vocab;
  if (args.vocab_dir) {
    input_vocab = read_vocab(*args.vocab_dir / kInputVocabFile);
    output_vocab = read_vocab(*args.vocab_dir / kOutputVocabFile);
  } else {
    std::vector<std::string> documents, headlines;
    for (const RawPair& p : raw) {
      documents.push_back(p.document);
      headlines.push_back(p.headline);
    }
    input_vocab = build_vocab(documents, args.mode, args.min_count);
    output_vocab = build_vocab(headlines, TokenMode::character, 1);
  }

  PrepareStats stats;
  const EncodedCorpus corpus = encode_corpus(raw, input_vocab, output_vocab, prep, &stats);
  write_vocab(input_vocab, args.out_dir / kInputVocabFile);
  write_vocab(output_vocab, args.out_dir / kOutputVocabFile);
  write_encoded_corpus(corpus, args.out_dir / kEncodedCorpusFile);

  out << "pairs: " << stats.pairs << "\n"
      << "input vocabulary: " << input_vocab.size() << "\n"
      << "output labels: " << output_vocab.size() << "\n"
      << "input OOV rate: " << stats.oov_rate() << "\n"
      << "headline OOV tokens dropped: " << stats.headline_oov << "\n"
      << "infeasible pairs: " << stats.infeasible << "\n";
  return stats;
}

TrainOutcome cmd_train(const TrainArgs& args, std::ostream& out) {
  try {
    args.config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  PreparedData data = load_prepared(args.data_dir);
  std::optional<PreparedData> heldout;
  if (args.heldout_dir) {
    heldout = load_prepared(*args.heldout_dir);
    if (!(heldout->input_vocab == data.input_vocab) || !(heldout->output_vocab == data.output_vocab))
      throw DataError("held-out data was encoded with different vocabularies");
    if (!(heldout->corpus.preprocess == data.corpus.preprocess))
      throw DataError("held-out data was prepared with different preprocessing");
  }
  ensure_dir(args.out_dir);

  const ModelDims dims = dims_for(args.config, data.input_vocab.size(), data.output_vocab.size());
  Rng init_rng = Rng(args.config.seed).split("init");
  ModelParams initial = ModelParams::initialize(dims, init_rng);
  if (args.embeddings) {
    const std::size_t copied =
        apply_embedding_table(initial, data.input_vocab, read_embedding_table(*args.embeddings));
    out << "embeddings: initialized " << copied << " rows from " << args.embeddings->string() << "\n";
  }

  std::ofstream log(args.out_dir / kTrainLogFile, std::ios::binary | std::ios::trunc);
  if (!log) throw DataError("cannot write " + (args.out_dir / kTrainLogFile).string());

  Checkpoint ckpt;
  ckpt.config = args.config;
  ckpt.input_vocab = data.input_vocab;
  ckpt.output_vocab = data.output_vocab;
  ckpt.preprocess = data.corpus.preprocess;

  auto on_epoch = [&](const EpochReport& r, const ModelParams& params) {
    nlohmann::ordered_json line;
    line["epoch"] = r.epoch;
    line["step"] = r.step;
    line["mean_loss"] = r.mean_loss;
    line["examples"] = r.examples;
    line["skipped_infeasible"] = r.skipped_infeasible;
    if (args.log_timing) line["wall_seconds"] = r.wall_seconds;
    log << line.dump() << '\n' << std::flush;
    out << "epoch " << r.epoch << "  loss " << r.mean_loss << "  examples " << r.examples
        << "  skipped " << r.skipped_infeasible << "  " << r.wall_seconds << "s\n"
        << std::flush;
    ckpt.params = params;
    ckpt.step = r.step;
    save_checkpoint(ckpt, args.out_dir / kCheckpointFile);
  };

  TrainOutcome outcome;
  outcome.result = train(std::move(initial), data.corpus.pairs, args.config, on_epoch);

  if (heldout) {
    DecodeConfig greedy{DecodeMethod::greedy, 1};
    // Evaluate the parameters as stored, so the numbers describe the checkpoint.
    HeldoutScore score =
        score_heldout(round_to_storage(outcome.result.params), heldout->corpus.pairs, greedy);
    nlohmann::ordered_json line;
    line["heldout_pairs"] = score.pairs;
    line["exact_match"] = score.exact_match;
    line["rouge_1"] = score.rouge_1;
    log << line.dump() << '\n';
    out << "held-out pairs " << score.pairs << "  exact-match " << score.exact_match
        << "  ROUGE-1 " << score.rouge_1 << "\n";
    outcome.heldout = score;
  }
  return outcome;
}

void cmd_summarize(const SummarizeArgs& args, std::ostream& out) {
  const Checkpoint model = load_checkpoint(args.checkpoint);
  if (args.expect_mode && *args.expect_mode != model.preprocess.mode)
    throw DataError("checkpoint was trained with " + std::string(to_string(model.preprocess.mode)) +
                    " input but --mode " + std::string(to_string(*args.expect_mode)) + " was given");
  if (args.expect_k && *args.expect_k != model.preprocess.k)
    throw DataError("checkpoint was trained with k=" + std::to_string(model.preprocess.k) +
                    " but --k " + std::to_string(*args.expect_k) + " was given");
  try {
    args.options.windows.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (args.options.decode.beam_width == 0) throw UsageError("--beam must be at least 1");

  std::vector<RawPair> docs;
  if (args.input.extension() == ".jsonl") {
    docs = read_corpus_jsonl(args.input, false);
  } else {
    std::ifstream in(args.input);
    if (!in) throw DataError("cannot read input " + args.input.string());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      docs.push_back({std::to_string(++n), line, ""});
    }
  }

  std::ofstream file;
  std::ostream* sink = &out;
  if (args.output) {
    file.open(*args.output, std::ios::binary | std::ios::trunc);
    if (!file) throw DataError("cannot write " + args.output->string());
    sink = &file;
  }

  for (const RawPair& doc : docs) {
    const Summary s = summarize_document(model, doc.document, args.options);
    nlohmann::ordered_json obj;
    obj["id"] = doc.id;
    obj["headline"] = s.headline;
    obj["overlap"] = s.overlap;
    if (args.diagnostics) {
      auto& cands = obj["candidates"] = nlohmann::ordered_json::array();
      for (const WindowCandidate& c : s.candidates) {
        nlohmann::ordered_json cj;
        cj["offset"] = c.window.offset;
        cj["length"] = c.window.length;
        cj["headline"] = c.text;
        cj["overlap"] = c.overlap;
        cands.push_back(std::move(cj));
      }
      obj["chosen"] = s.chosen;
      obj["saliency"] = s.saliency;
    }
    *sink << obj.dump() << '\n';
  }
}

EvaluationReport cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
  if (!(args.lcs_threshold >= 0.0 && args.lcs_threshold <= 1.0))
    throw UsageError("--lcs-threshold must lie in [0, 1]");
  const auto predictions = read_predictions(args.predictions);
  const auto references = read_corpus_jsonl(args.references);

  std::set<std::string> reference_ids;
  std::vector<std::string> missing_predictions;
  for (const RawPair& r : references) {
    reference_ids.insert(r.id);
    if (!predictions.count(r.id)) missing_predictions.push_back(r.id);
  }
  std::vector<std::string> missing_references;
  for (const auto& [id, _] : predictions)
    if (!reference_ids.count(id)) missing_references.push_back(id);
  if (!missing_predictions.empty() || !missing_references.empty()) {
    std::string msg = "prediction/reference ids do not match;";
    auto list = [&](const char* what, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      msg += std::string(" ") + what + ":";
      for (const auto& id : ids) msg += " " + id;
      msg += ";";
    };
    list("missing predictions", missing_predictions);
    list("missing references", missing_references);
    throw DataError(msg);
  }

  std::vector<TokenList> cands, refs;
  std::vector<double> lcs;
  for (const RawPair& r : references) {
    cands.push_back(tokenize(predictions.at(r.id), args.tokens));
    refs.push_back(tokenize(r.headline, args.tokens));
    const TokenList doc = tokenize(r.document, args.tokens);
    // An empty reference headline preserves nothing; it lands in the low group.
    lcs.push_back(refs.back().empty() ? 0.0 : lcs_order_score(refs.back(), doc));
  }
  const LcsSplit split = split_scores(lcs, args.lcs_threshold);

  std::vector<std::size_t> all(references.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  EvaluationReport report;
  report.threshold = args.lcs_threshold;
  report.overall = group_report("overall", all, cands, refs, lcs, all.size());
  report.high = group_report("high-lcs", split.high, cands, refs, lcs, all.size());
  report.low = group_report("low-lcs", split.low, cands, refs, lcs, all.size());

  out << format_table(report);
  if (args.json_out) {
    std::ofstream json(*args.json_out, std::ios::binary | std::ios::trunc);
    if (!json) throw DataError("cannot write " + args.json_out->string());
    json << format_json(report) << '\n';
  }
  return report;
}

bool cmd_selfcheck(const SelfcheckOptions& opts, bool inject_fault, std::ostream& out) {
  std::vector<SuiteResult> results;
  if (inject_fault) {
    testing::ScopedTransitionFault fault;
    results = run_selfcheck(opts);
  } else {
    results = run_selfcheck(opts);
  }
  out << format_selfcheck(results);
  bool ok = true;
  for (const SuiteResult& r : results) ok = ok && r.passed;
  out << (ok ? "selfcheck: all suites passed\n" : "selfcheck: FAILED\n");
  return ok;
}

}  // namespace ctcsum::cli
