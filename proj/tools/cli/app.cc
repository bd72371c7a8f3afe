// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/app.h"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cli/commands.h"
#include "cli/config_args.h"
#include "fusionkit/core/posteriorgram.h"
#include "fusionkit/core/text.h"
#include "fusionkit/core/vocabulary.h"
#include "fusionkit/decoder/adapter.h"
#include "fusionkit/decoder/decoder.h"
#include "fusionkit/eval/wer.h"
#include "fusionkit/lm/ngram.h"
#include "fusionkit/lm/retokenize.h"
#include "fusionkit/lm/table_lm.h"
#include "fusionkit/synth/synth.h"

namespace fusionkit::cli {
namespace fs = std::filesystem;
namespace {

void AddRunOptions(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--strategy", c.strategy, "ctc-greedy, time-sync, delayed-fusion or joint");
  cmd->add_option("--corpus", c.corpus, "Corpus directory");
  cmd->add_option("--vocab", c.vocab, "Vocabulary file (default <corpus>/vocab.txt)");
  cmd->add_option("--lm", c.lm, "Language model file");
  cmd->add_option("--lm_kind", c.lm_kind, "ngram or table");
  cmd->add_option("--decoder", c.decoder, "Attention decoder weights");
  cmd->add_option("--interface", c.interface, "aed, prefix or merged");
  cmd->add_option("--prefix_attention", c.prefix_attention, "causal or bidirectional");
  cmd->add_option("--prompt", c.prompt, "Prompt tokens, space separated");
  cmd->add_option("--downsample", c.downsample, "concat or ctc-compress");
  cmd->add_option("--downsample_factor", c.downsample_factor);
  cmd->add_option("--adapter_threshold", c.adapter_threshold);
  cmd->add_option("--ctc_weight", c.ctc_weight);
  cmd->add_option("--lm_weight", c.lm_weight);
  cmd->add_option("--decoder_weight", c.decoder_weight);
  cmd->add_option("--beam", c.beam);
  cmd->add_option("--length_norm", c.length_norm, "true or false");
  cmd->add_option("--max_len_factor", c.max_len_factor);
  cmd->add_option("--top_k", c.top_k, "0 disables top-k pruning");
  cmd->add_option("--compress_threshold", c.compress_threshold, "0 disables compression");
  cmd->add_option("--nbest", c.nbest, "Lines per n-best file, 0 for all");
  cmd->add_option("--jobs", c.jobs, "Utterances decoded in parallel");
  cmd->add_option("--output", c.output, "Output directory");
}

// The resolved options of `cmd` as `key = value` lines.
std::string Snapshot(const CLI::App* cmd) {
  std::istringstream in(cmd->config_to_str(/*default_also=*/true, /*write_description=*/false));
  std::string out, line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out += line.substr(0, eq) + " = " + line.substr(eq + 1) + '\n';
  }
  return out;
}

std::vector<std::vector<int>> ReadTokenizedLines(const Vocabulary& vocab, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<int>> out;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (SplitWhitespace(line).empty()) continue;
    try {
      out.push_back(lm::Retokenize(vocab, line));
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("{}:{}: {}", path.string(), number, e.what()));
    }
  }
  return out;
}

std::vector<std::string> ReadLines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    for (auto& w : SplitWhitespace(line)) out.push_back(std::move(w));
  }
  return out;
}

int Wer(const std::string& ref_path, const std::string& hyp_path, const std::string& mode_name,
        std::ostream& out) {
  const auto mode = eval::ParseNormalizationMode(mode_name);
  const auto refs = ReadTranscripts(ref_path);
  const auto hyps = ReadTranscripts(hyp_path);
  std::map<std::string, std::string> by_id(hyps.begin(), hyps.end());
  if (by_id.size() != refs.size()) {
    throw std::runtime_error(fmt::format("{} has {} utterances, {} has {}", ref_path,
                                         refs.size(), hyp_path, hyps.size()));
  }
  std::vector<eval::TranscriptPair> pairs;
  for (const auto& [id, text] : refs) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw std::runtime_error(fmt::format("{}: no hypothesis for {}", hyp_path, id));
    pairs.emplace_back(eval::NormalizeText(text, mode), eval::NormalizeText(it->second, mode));
  }
  const auto c = eval::CorpusWer(pairs);
  out << fmt::format("WER {} (S={} D={} I={} N={})\n", eval::FormatWer(c), c.substitutions,
                     c.deletions, c.insertions, c.ref_words);
  return 0;
}

int Ppl(const std::string& path, const std::string& kind, const std::string& text,
        std::ostream& out) {
  std::unique_ptr<lm::LanguageModel> model;
  if (kind == "ngram") {
    model = std::make_unique<lm::NGramModel>(lm::NGramModel::Load(path));
  } else if (kind == "table") {
    model = std::make_unique<lm::TableLM>(lm::TableLM::Load(path));
  } else {
    throw std::invalid_argument("lm_kind: expected ngram or table");
  }
  const auto corpus = ReadTokenizedLines(model->vocab(), text);
  if (corpus.empty()) throw std::runtime_error(text + ": no sentences");
  const auto r = lm::Perplexity(*model, corpus);
  out << fmt::format("ppl {:.1f}\ntoken_ppl {:.6f}\nword_ppl {:.6f}\ntokens {}\nlog_prob {:.6f}\n",
                     r.token_ppl(), r.token_ppl(), r.word_ppl(), r.num_tokens, r.total_log_prob);
  return 0;
}

struct SynthArgs {
  synth::SynthConfig cfg;
  int utterances = 100;
  int lm_sentences = 0;
  uint64_t lm_seed = 4242;
  std::string vocab, words, output;
};

int Synth(SynthArgs a, std::ostream& out) {
  if (a.utterances < 1) throw std::invalid_argument("utterances: must be at least 1");
  if (a.lm_sentences < 0) throw std::invalid_argument("lm_sentences: must be non-negative");
  if (a.output.empty()) throw std::invalid_argument("output: required");
  if (!a.vocab.empty()) a.cfg.vocab = Vocabulary::Load(a.vocab);
  if (!a.words.empty()) a.cfg.words = ReadLines(a.words);
  const auto corpus = synth::GenerateCorpus(a.cfg, static_cast<size_t>(a.utterances));
  const fs::path dir = a.output;
  synth::WriteCorpus(dir, a.cfg, corpus);
  synth::ReaderDecoderWeights(a.cfg.vocab).Save(dir / "decoder.fkdw");
  if (a.lm_sentences > 0) {
    std::ofstream lm_text(dir / "lm_text.txt");
    for (const auto& s : synth::GenerateTokenText(a.cfg, a.lm_sentences, a.lm_seed)) {
      lm_text << lm::DetokenizeText(a.cfg.vocab, s) << '\n';
    }
    if (!lm_text) throw std::runtime_error("cannot write " + (dir / "lm_text.txt").string());
  }
  out << fmt::format("wrote {} utterances to {}\n", a.utterances, dir.string());
  return 0;
}

struct ExportArgs {
  std::string decoder, vocab, interface = "aed", prefix_attention = "causal", prompt, encoder,
      labels, output;
};

int ExportAttn(const ExportArgs& a, std::ostream& out) {
  if (a.decoder.empty() || a.vocab.empty() || a.output.empty()) {
    throw std::invalid_argument("decoder, vocab and output are required");
  }
  const Vocabulary vocab = Vocabulary::Load(a.vocab);
  auto weights =
      std::make_shared<const decoder::DecoderWeights>(decoder::DecoderWeights::Load(a.decoder));
  auto ids = [&](const std::string& text) {
    std::vector<int> out;
    for (const auto& token : SplitWhitespace(text)) {
      const auto id = vocab.Find(token);
      if (!id) throw std::invalid_argument("unknown token " + token);
      out.push_back(*id);
    }
    return out;
  };
  decoder::InterfaceConfig ic;
  ic.kind = decoder::ParseInterfaceKind(a.interface);
  ic.prefix_attention = a.prefix_attention == "bidirectional"
                            ? decoder::PrefixAttention::kBidirectional
                            : decoder::PrefixAttention::kCausal;
  ic.prompt = ids(a.prompt);
  const decoder::Decoder dec(weights, ic, vocab.bos_id(), vocab.eos_id());
  std::optional<Matrix> audio;
  if (!a.encoder.empty()) {
    decoder::AdapterConfig adapter;
    if (weights->adapter_proj) adapter.projection = &*weights->adapter_proj;
    audio = decoder::ApplyAdapter(ReadEncoderOutput(a.encoder), adapter).frames();
  }
  std::vector<int> labels{vocab.bos_id()};
  for (int id : ids(a.labels)) labels.push_back(id);
  dec.ExportAttention(audio ? &*audio : nullptr, labels).ToArchive().Save(a.output);
  out << "wrote " << a.output << '\n';
  return 0;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Fused CTC, language model and attention decoder search");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);

  RunConfig run;
  auto* decode = app.add_subcommand("decode", "Decode a corpus directory");
  AddRunOptions(decode, run);

  RunConfig bench_run;
  BenchGrid grid;
  auto* bench = app.add_subcommand("bench", "Sweep top-k, compression and beam");
  AddRunOptions(bench, bench_run);
  bench->add_option("--grid_top_k", grid.top_k, "Values of top_k; `all` is the vocabulary size");
  bench->add_option("--grid_tau", grid.tau, "Values of compress_threshold");
  bench->add_option("--grid_beam", grid.beam, "Values of beam");

  std::string ref, hyp, normalization = "none";
  auto* wer = app.add_subcommand("wer", "Corpus word error rate");
  wer->add_option("--ref", ref, "id\\ttranscript file")->required();
  wer->add_option("--hyp", hyp, "id\\ttranscript file")->required();
  wer->add_option("--normalization", normalization, "none or lowercase");

  std::string lm_path, lm_kind = "ngram", text;
  auto* ppl = app.add_subcommand("ppl", "Perplexity of a text file");
  ppl->add_option("--lm", lm_path)->required();
  ppl->add_option("--lm_kind", lm_kind, "ngram or table");
  ppl->add_option("--text", text, "One sentence per line")->required();

  std::string train_vocab, train_text, train_out;
  int order = 3;
  double backoff = lm::kDefaultBackoffFactor;
  auto* train = app.add_subcommand("lm-train", "Train an n-gram model");
  train->add_option("--vocab", train_vocab)->required();
  train->add_option("--text", train_text, "One sentence per line")->required();
  train->add_option("--order", order);
  train->add_option("--backoff", backoff);
  train->add_option("--output", train_out)->required();

  SynthArgs sa;
  auto* syn = app.add_subcommand("synth", "Write a synthetic corpus");
  syn->add_option("--seed", sa.cfg.seed);
  syn->add_option("--grammar_seed", sa.cfg.grammar_seed);
  syn->add_option("--utterances", sa.utterances);
  syn->add_option("--noise", sa.cfg.noise);
  syn->add_option("--confusion_scale", sa.cfg.confusion_scale);
  syn->add_option("--min_words", sa.cfg.min_words);
  syn->add_option("--max_words", sa.cfg.max_words);
  syn->add_option("--min_frames", sa.cfg.min_frames);
  syn->add_option("--max_frames", sa.cfg.max_frames);
  syn->add_option("--min_gap", sa.cfg.min_gap);
  syn->add_option("--max_gap", sa.cfg.max_gap);
  syn->add_option("--successors", sa.cfg.successors);
  syn->add_option("--successor_prob", sa.cfg.successor_prob);
  syn->add_option("--frame_duration_ms", sa.cfg.frame_duration_ms);
  syn->add_option("--vocab", sa.vocab, "Vocabulary file (default built-in subwords)");
  syn->add_option("--words", sa.words, "Word list file (default built-in list)");
  syn->add_option("--lm_sentences", sa.lm_sentences, "Sentences written to lm_text.txt");
  syn->add_option("--lm_seed", sa.lm_seed);
  syn->add_option("--output", sa.output);

  ExportArgs ea;
  auto* exp = app.add_subcommand("export-attn", "Export decoder attention weights");
  exp->add_option("--decoder", ea.decoder);
  exp->add_option("--vocab", ea.vocab);
  exp->add_option("--interface", ea.interface);
  exp->add_option("--prefix_attention", ea.prefix_attention);
  exp->add_option("--prompt", ea.prompt);
  exp->add_option("--encoder", ea.encoder, "Encoder output file (.fkeo)");
  exp->add_option("--labels", ea.labels, "Label tokens after BOS, space separated");
  exp->add_option("--output", ea.output);

  try {
    auto expanded = ExpandConfigArgs(args);
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (decode->parsed()) {
      if (run.output.empty()) throw std::invalid_argument("output: required");
      const DecodeResult r = Decode(run);
      WriteDecodeOutputs(run.output, Snapshot(decode), run, r);
      out << fmt::format("decoded {} utterances into {}\n", r.ids.size(), run.output);
    } else if (bench->parsed()) {
      Bench(bench_run, grid, Snapshot(bench), out);
    } else if (wer->parsed()) {
      return Wer(ref, hyp, normalization, out);
    } else if (ppl->parsed()) {
      return Ppl(lm_path, lm_kind, text, out);
    } else if (train->parsed()) {
      const Vocabulary vocab = Vocabulary::Load(train_vocab);
      const auto corpus = ReadTokenizedLines(vocab, train_text);
      lm::NGramModel::Train(vocab, corpus, order, backoff).Save(train_out);
      out << fmt::format("trained order-{} model on {} sentences\n", order, corpus.size());
    } else if (syn->parsed()) {
      return Synth(sa, out);
    } else if (exp->parsed()) {
      return ExportAttn(ea, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace fusionkit::cli
