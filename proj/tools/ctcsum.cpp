// ctcsum: prepare, train, summarize, evaluate, selfcheck.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ctcsum/commands.hpp"

using namespace ctcsum;
using namespace ctcsum::cli;

namespace {

// Reads a JSON object of flag names to values. Top-level keys naming a
// subcommand hold that subcommand's flags; any other key belongs to the
// subcommand being run.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::string section) : section_(std::move(section)) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(input);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : doc.items()) {
      if (value.is_object()) {
        if (key != section_) continue;
        for (const auto& [name, v] : value.items()) items.push_back(item(name, v));
      } else {
        items.push_back(item(key, value));
      }
    }
    return items;
  }

 private:
  CLI::ConfigItem item(const std::string& name, const nlohmann::json& v) const {
    CLI::ConfigItem it;
    if (!section_.empty()) it.parents = {section_};
    it.name = name;
    if (v.is_array()) {
      for (const auto& e : v) it.inputs.push_back(scalar(e));
    } else {
      it.inputs.push_back(scalar(v));
    }
    return it;
  }

  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  std::string section_;
};

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

const std::map<std::string, TokenMode> kModes{{"char", TokenMode::character},
                                              {"word", TokenMode::word}};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> commands{"prepare", "train", "summarize", "evaluate", "selfcheck"};
  std::string section;
  for (int i = 1; i < argc && section.empty(); ++i)
    for (const auto& c : commands)
      if (c == argv[i]) section = c;

  CLI::App app{"CTC headline generation: prepare, train, summarize, evaluate, selfcheck"};
  app.config_formatter(std::make_shared<JsonConfig>(section));
  app.set_config("--config", "", "JSON file of flag values (flat, or keyed by subcommand)");
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);

  // prepare
  PrepareArgs prep;
  std::string prep_mode = "char";
  std::string synthetic;
  SyntheticConfig syn;
  std::size_t truncate = 0;
  std::string vocab_dir;
  prep.out_dir = env_or("CTCSUM_DATA_DIR", "data");
  auto* p = app.add_subcommand("prepare", "Build vocabularies and an encoded corpus");
  p->add_option("--input", prep.input, "Raw corpus JSONL with id, document, headline");
  p->add_option("--out", prep.out_dir, "Output directory (env CTCSUM_DATA_DIR)")->capture_default_str();
  p->add_option("--mode", prep_mode, "Document tokens: char or word")
      ->check(CLI::IsMember({"char", "word"}))
      ->capture_default_str();
  p->add_option("--k", prep.k, "Repeat each input token k times")->capture_default_str();
  p->add_option("--min-count", prep.min_count, "Minimum frequency for a vocabulary entry")
      ->capture_default_str();
  auto* trunc_opt = p->add_option("--truncate", truncate,
                                  "Keep the first N document tokens; 0 disables "
                                  "(default 55 for char, off for word)");
  p->add_option("--vocab-dir", vocab_dir, "Reuse vocabularies from a prepared directory");
  p->add_option("--synthetic", synthetic, "Generate a synthetic corpus: extract or bigram")
      ->check(CLI::IsMember({"extract", "bigram"}));
  p->add_option("--pairs", syn.pairs, "Synthetic pair count")->capture_default_str();
  p->add_option("--seed", syn.seed, "Synthetic generator seed")->capture_default_str();
  p->add_option("--doc-len", syn.doc_len, "Synthetic document length")->capture_default_str();
  p->add_option("--symbols", syn.vocab_size, "Synthetic symbol vocabulary size")->capture_default_str();
  p->add_option("--salient", syn.salient_symbols, "Synthetic salient subset size")
      ->capture_default_str();
  p->add_flag("--allow-repeats", syn.allow_adjacent_repeats,
              "Let equal salient symbols sit next to each other");

  // train
  TrainArgs tr;
  std::string optimizer = "adam";
  std::string heldout, embeddings;
  tr.data_dir = env_or("CTCSUM_DATA_DIR", "data");
  tr.out_dir = env_or("CTCSUM_MODEL_DIR", "model");
  auto* t = app.add_subcommand("train", "Train the BiLSTM emission model with the CTC loss");
  t->add_option("--data", tr.data_dir, "Prepared data directory (env CTCSUM_DATA_DIR)")
      ->capture_default_str();
  t->add_option("--out", tr.out_dir, "Checkpoint and log directory (env CTCSUM_MODEL_DIR)")
      ->capture_default_str();
  t->add_option("--lr", tr.config.learning_rate, "Learning rate")->capture_default_str();
  t->add_option("--batch-size", tr.config.batch_size, "Examples per step")->capture_default_str();
  t->add_option("--epochs", tr.config.epochs, "Passes over the corpus")->capture_default_str();
  t->add_option("--clip-norm", tr.config.clip_norm, "Global gradient-norm clip")
      ->capture_default_str();
  t->add_option("--seed", tr.config.seed, "Initialization and shuffling seed")->capture_default_str();
  t->add_option("--optimizer", optimizer, "adam or sgd")
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  t->add_option("--d-emb", tr.config.d_emb, "Embedding width")->capture_default_str();
  t->add_option("--d-hidden", tr.config.d_hidden, "LSTM hidden width per direction")
      ->capture_default_str();
  t->add_option("--layers", tr.config.layers, "Bidirectional LSTM layers")->capture_default_str();
  t->add_option("--threads", tr.config.threads, "Gradient worker threads")->capture_default_str();
  t->add_option("--heldout", heldout, "Prepared held-out directory scored after training");
  t->add_option("--embeddings", embeddings, "Pretrained embedding table (token v1 v2 ...)");
  t->add_flag("--log-timing", tr.log_timing, "Record wall time in the JSON log");

  // summarize
  SummarizeArgs sm;
  std::string sm_output, sm_mode;
  std::size_t sm_k = 0;
  bool greedy = false;
  sm.checkpoint = env_or("CTCSUM_CHECKPOINT", "model/model.ckpt");
  auto* s = app.add_subcommand("summarize", "Generate headlines with sliding windows");
  s->add_option("--checkpoint", sm.checkpoint, "Model checkpoint (env CTCSUM_CHECKPOINT)")
      ->capture_default_str();
  s->add_option("--input", sm.input, "Documents: .jsonl objects or one document per line")
      ->required();
  s->add_option("--output", sm_output, "Headline JSONL (default stdout)");
  s->add_option("--window", sm.options.windows.window_len, "Window length")->capture_default_str();
  s->add_option("--stride", sm.options.windows.stride, "Window stride")->capture_default_str();
  s->add_option("--max-windows", sm.options.windows.max_windows, "Window cap")
      ->capture_default_str();
  s->add_option("--scan-len", sm.options.windows.scan_len, "Leading tokens considered")
      ->capture_default_str();
  s->add_option("--beam", sm.options.decode.beam_width, "Prefix beam width")->capture_default_str();
  s->add_flag("--greedy", greedy, "Best-path decoding instead of beam search");
  s->add_flag("--diagnostics", sm.diagnostics, "Include candidates and blank saliency");
  s->add_option("--mode", sm_mode, "Expected input mode; must match the checkpoint")
      ->check(CLI::IsMember({"char", "word"}));
  s->add_option("--k", sm_k, "Expected k; must match the checkpoint");

  // evaluate
  EvaluateArgs ev;
  std::string ev_tokens = "char", ev_json;
  auto* e = app.add_subcommand("evaluate", "ROUGE report, overall and by LCS-order group");
  e->add_option("--predictions", ev.predictions, "JSONL of {id, headline}")->required();
  e->add_option("--references", ev.references, "JSONL of {id, document, headline}")->required();
  e->add_option("--lcs-threshold", ev.lcs_threshold, "High group: LCS score above this")
      ->capture_default_str();
  e->add_option("--tokens", ev_tokens, "Metric tokens: char or word")
      ->check(CLI::IsMember({"char", "word"}))
      ->capture_default_str();
  e->add_option("--json", ev_json, "Also write the report as JSON");

  // selfcheck
  SelfcheckOptions sc;
  bool inject_fault = false;
  auto* c = app.add_subcommand("selfcheck", "Run the embedded oracle suites");
  c->add_option("--seed", sc.seed, "Base seed; instance i uses seed + i")->capture_default_str();
  c->add_option("--ctc-instances", sc.ctc_instances, "CTC oracle instances")->capture_default_str();
  c->add_option("--gradient-instances", sc.gradient_instances, "CTC gradient instances")
      ->capture_default_str();
  c->add_option("--beam-instances", sc.beam_instances, "Beam vs exhaustive instances")
      ->capture_default_str();
  c->add_option("--lcs-instances", sc.lcs_instances, "LCS oracle instances")->capture_default_str();
  c->add_option("--model-instances", sc.model_instances, "Model gradient instances")
      ->capture_default_str();
  c->add_flag("--inject-fault", inject_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (p->parsed()) {
      prep.mode = kModes.at(prep_mode);
      if (trunc_opt->count()) prep.truncate = truncate;
      if (!vocab_dir.empty()) prep.vocab_dir = vocab_dir;
      if (!synthetic.empty()) {
        syn.task = synthetic == "bigram" ? SyntheticTask::bigram : SyntheticTask::extract;
        prep.synthetic = syn;
      } else if (prep.input.empty()) {
        throw UsageError("prepare needs --input or --synthetic");
      }
      cmd_prepare(prep, std::cout);
    } else if (t->parsed()) {
      tr.config.optimizer = parse_optimizer(optimizer);
      if (!heldout.empty()) tr.heldout_dir = heldout;
      if (!embeddings.empty()) tr.embeddings = embeddings;
      cmd_train(tr, std::cout);
    } else if (s->parsed()) {
      if (greedy) sm.options.decode.method = DecodeMethod::greedy;
      if (!sm_output.empty()) sm.output = sm_output;
      if (!sm_mode.empty()) sm.expect_mode = kModes.at(sm_mode);
      if (sm_k != 0) sm.expect_k = sm_k;
      cmd_summarize(sm, std::cout);
    } else if (e->parsed()) {
      ev.tokens = kModes.at(ev_tokens);
      if (!ev_json.empty()) ev.json_out = ev_json;
      cmd_evaluate(ev, std::cout);
    } else if (c->parsed()) {
      if (!cmd_selfcheck(sc, inject_fault, std::cout)) return static_cast<int>(ExitCode::numerical);
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return static_cast<int>(classify(err));
  }
  return 0;
}
