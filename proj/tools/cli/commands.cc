// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/commands.h"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fusionkit/core/log_math.h"
#include "fusionkit/core/posteriorgram.h"
#include "fusionkit/core/text.h"
#include "fusionkit/core/vocabulary.h"
#include "fusionkit/ctc/ctc.h"
#include "fusionkit/decoder/adapter.h"
#include "fusionkit/decoder/decoder.h"
#include "fusionkit/eval/wer.h"
#include "fusionkit/lm/ngram.h"
#include "fusionkit/lm/retokenize.h"
#include "fusionkit/lm/table_lm.h"
#include "fusionkit/search/label_sync.h"
#include "fusionkit/search/time_sync.h"

namespace fusionkit::cli {
namespace fs = std::filesystem;
namespace {

const std::set<std::string> kStrategies{"ctc-greedy", "time-sync", "delayed-fusion", "joint"};

void Require(bool ok, std::string_view key, std::string_view what) {
  if (!ok) throw std::invalid_argument(fmt::format("{}: {}", key, what));
}

std::shared_ptr<const lm::LanguageModel> LoadLm(const std::string& path,
                                                const std::string& kind) {
  if (kind == "ngram") return std::make_shared<const lm::NGramModel>(lm::NGramModel::Load(path));
  return std::make_shared<const lm::TableLM>(lm::TableLM::Load(path));
}

decoder::Downsample ParseDownsample(const std::string& name) {
  return name == "ctc-compress" ? decoder::Downsample::kCtcCompress
                                : decoder::Downsample::kConcat;
}

// Everything shared by the utterances of one run.
struct Setup {
  Vocabulary vocab;
  std::vector<std::string> ids;
  std::vector<std::shared_ptr<const Posteriorgram>> pgs;
  std::vector<std::optional<EncoderOutput>> encoders;
  std::shared_ptr<const lm::LanguageModel> lm;
  std::shared_ptr<const decoder::DecoderWeights> weights;
  std::shared_ptr<const decoder::Decoder> dec;
};

Setup Load(const RunConfig& config) {
  config.Validate();
  const fs::path dir = config.corpus;
  Setup s{Vocabulary::Load(config.vocab.empty() ? dir / "vocab.txt" : fs::path(config.vocab))};
  const Corpus corpus = ListCorpus(dir);
  s.ids = corpus.ids;
  for (const auto& id : s.ids) {
    const fs::path pg_path = dir / (id + ".fkpg");
    if (!fs::exists(pg_path)) {
      throw std::runtime_error(
          fmt::format("utterance {}: missing posteriorgram {}", id, pg_path.string()));
    }
    auto pg = std::make_shared<const Posteriorgram>(ReadPosteriorgram(pg_path));
    if (pg->vocab_size() != static_cast<size_t>(s.vocab.size())) {
      throw std::runtime_error(fmt::format("utterance {}: {} has {} labels, vocabulary has {}",
                                           id, pg_path.string(), pg->vocab_size(),
                                           s.vocab.size()));
    }
    s.pgs.push_back(std::move(pg));
    std::optional<EncoderOutput> enc;
    if (!config.decoder.empty()) {
      const fs::path enc_path = dir / (id + ".fkeo");
      if (!fs::exists(enc_path)) {
        throw std::runtime_error(
            fmt::format("utterance {}: missing encoder output {}", id, enc_path.string()));
      }
      enc = ReadEncoderOutput(enc_path);
    }
    s.encoders.push_back(std::move(enc));
  }
  if (!config.lm.empty()) s.lm = LoadLm(config.lm, config.lm_kind);
  if (config.strategy == "delayed-fusion" && !s.lm) {
    throw std::invalid_argument("lm: delayed-fusion needs a language model");
  }
  if (!config.decoder.empty()) {
    s.weights = std::make_shared<const decoder::DecoderWeights>(
        decoder::DecoderWeights::Load(config.decoder));
    decoder::InterfaceConfig ic;
    ic.kind = decoder::ParseInterfaceKind(config.interface);
    ic.prefix_attention = config.prefix_attention == "bidirectional"
                              ? decoder::PrefixAttention::kBidirectional
                              : decoder::PrefixAttention::kCausal;
    for (const auto& token : SplitWhitespace(config.prompt)) {
      const auto id = s.vocab.Find(token);
      if (!id) throw std::invalid_argument("prompt: unknown token " + token);
      ic.prompt.push_back(*id);
    }
    s.dec = std::make_shared<const decoder::Decoder>(s.weights, ic, s.vocab.bos_id(),
                                                     s.vocab.eos_id());
  }
  return s;
}

search::NBestList GreedyNBest(const Posteriorgram& pg, int blank) {
  double score = 0.0;
  for (size_t t = 0; t < pg.num_frames(); ++t) {
    const auto row = pg.log_probs().Row(t);
    score += row[ArgMax(row)];
  }
  Hypothesis h;
  h.labels = ctc::GreedyDecode(pg, blank);
  h.score_components["ctc"] = score;
  h.combined_score = score;
  h.finished = true;
  return {h};
}

search::NBestList DecodeOne(const RunConfig& config, const Setup& s, size_t i,
                            search::DecodeStats* stats) {
  const Posteriorgram& base = *s.pgs[i];
  auto pg = s.pgs[i];
  if (config.compress_threshold > 0.0) {
    pg = std::make_shared<const Posteriorgram>(
        ctc::CompressPosteriors(*pg, ctc::MergeIndices(*pg, config.compress_threshold)));
  }
  if (config.top_k > 0) {
    pg = std::make_shared<const Posteriorgram>(
        ctc::TopKPrune(*pg, config.top_k, s.vocab.blank_id()));
  }
  const search::TimeSyncOptions ts{.beam = config.beam};
  if (config.strategy == "ctc-greedy") return GreedyNBest(*pg, s.vocab.blank_id());
  if (config.strategy == "time-sync") {
    return search::TimeSyncBeam(*pg, s.vocab, s.lm.get(), config.lm_weight, ts, stats);
  }
  if (config.strategy == "delayed-fusion") {
    return search::DelayedFusionBeam(*pg, s.vocab, *s.lm, config.lm_weight, ts, stats);
  }
  ScorerWeights w;
  w.length_norm = config.length_norm;
  w.max_len_factor = config.max_len_factor;
  search::ScorerList scorers;
  scorers.push_back(std::make_shared<search::CtcPrefixLabelScorer>("ctc", pg, s.vocab));
  w.weights["ctc"] = config.ctc_weight;
  if (s.lm) {
    scorers.push_back(std::make_shared<search::LmLabelScorer>(
        "lm", config.lm_kind == "ngram" ? search::ScorerKind::kNGram : search::ScorerKind::kTable,
        s.lm, s.vocab));
    w.weights["lm"] = config.lm_weight;
  }
  if (s.dec) {
    decoder::AdapterConfig adapter;
    adapter.downsample = ParseDownsample(config.downsample);
    adapter.factor = config.downsample_factor;
    adapter.threshold = config.adapter_threshold;
    if (s.weights->adapter_proj) adapter.projection = &*s.weights->adapter_proj;
    auto audio = std::make_shared<const Matrix>(
        decoder::ApplyAdapter(*s.encoders[i], adapter, &base).frames());
    scorers.push_back(std::make_shared<search::DecoderLabelScorer>("dec", s.dec, audio));
    w.weights["dec"] = config.decoder_weight;
  }
  const search::LabelSyncOptions opts{.beam = config.beam,
                                      .max_len = search::MaxLabels(w, base.num_frames())};
  return search::LabelSyncBeam(scorers, w, s.vocab, opts, stats);
}

DecodeResult DecodeLoaded(const RunConfig& config, const Setup& s) {
  const size_t n = s.ids.size();
  DecodeResult result;
  result.ids = s.ids;
  result.nbest.resize(n);
  result.hypotheses.resize(n);
  std::vector<search::DecodeStats> stats(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        {
          search::ScopedTimer timer(&stats[i]);
          result.nbest[i] = DecodeOne(config, s, i, &stats[i]);
        }
        stats[i].audio_seconds = s.pgs[i]->duration_seconds();
        if (!result.nbest[i].empty()) {
          result.hypotheses[i] = lm::DetokenizeText(s.vocab, result.nbest[i].front().labels);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const size_t jobs = std::min<size_t>(static_cast<size_t>(config.jobs), n);
  std::vector<std::thread> threads;
  for (size_t j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (size_t i = 0; i < n; ++i) {
    if (!errors[i]) {
      result.stats.Merge(stats[i]);
      continue;
    }
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("utterance {}: {}", s.ids[i], e.what()));
    }
  }
  return result;
}

std::vector<std::string> ReferencesFor(const RunConfig& config, const std::vector<std::string>& ids) {
  const Corpus corpus = ListCorpus(config.corpus);
  if (corpus.references.empty() || corpus.ids != ids) {
    throw std::runtime_error("bench needs refs.txt in " + config.corpus);
  }
  return corpus.references;
}

eval::AlignmentCounts Score(const std::vector<std::string>& refs,
                            const std::vector<std::string>& hyps) {
  std::vector<eval::TranscriptPair> pairs;
  for (size_t i = 0; i < refs.size(); ++i) pairs.emplace_back(refs[i], hyps[i]);
  return eval::CorpusWer(pairs);
}

std::string StatsText(const search::DecodeStats& st) {
  return fmt::format(
      "scorer_evaluations = {}\npeak_live_hypotheses = {}\npeak_candidates = {}\n"
      "wall_seconds = {:.6f}\naudio_seconds = {:.6f}\nrtf = {:.6f}\n",
      st.scorer_evaluations, st.peak_live_hypotheses, st.peak_candidates, st.wall_seconds,
      st.audio_seconds, st.rtf());
}

std::vector<std::string> GridValues(const std::string& key, const std::string& text) {
  auto values = SplitWhitespace(text);
  if (values.empty()) throw std::invalid_argument(key + ": empty grid");
  return values;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

void RunConfig::Validate() const {
  Require(kStrategies.count(strategy) == 1, "strategy",
          "expected ctc-greedy, time-sync, delayed-fusion or joint");
  Require(!corpus.empty(), "corpus", "required");
  Require(lm_kind == "ngram" || lm_kind == "table", "lm_kind", "expected ngram or table");
  Require(interface == "aed" || interface == "prefix" || interface == "merged", "interface",
          "expected aed, prefix or merged");
  Require(prefix_attention == "causal" || prefix_attention == "bidirectional",
          "prefix_attention", "expected causal or bidirectional");
  Require(downsample == "concat" || downsample == "ctc-compress", "downsample",
          "expected concat or ctc-compress");
  Require(downsample_factor >= 1, "downsample_factor", "must be at least 1");
  Require(beam >= 1, "beam", "must be at least 1");
  Require(max_len_factor > 0.0, "max_len_factor", "must be positive");
  Require(top_k >= 0, "top_k", "must be non-negative");
  Require(compress_threshold >= 0.0, "compress_threshold", "must be non-negative");
  Require(nbest >= 0, "nbest", "must be non-negative");
  Require(jobs >= 1, "jobs", "must be at least 1");
  Require(strategy != "delayed-fusion" || !lm.empty(), "lm", "delayed-fusion needs an lm");
  Require(decoder.empty() || strategy == "joint", "decoder", "only the joint strategy uses it");
}

Corpus ListCorpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("corpus directory not found: " + dir.string());
  Corpus c;
  const fs::path refs = dir / "refs.txt";
  if (fs::exists(refs)) {
    for (auto& [id, text] : ReadTranscripts(refs)) {
      c.ids.push_back(id);
      c.references.push_back(text);
    }
    return c;
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".fkpg") c.ids.push_back(entry.path().stem().string());
  }
  std::sort(c.ids.begin(), c.ids.end());
  return c;
}

std::vector<std::pair<std::string, std::string>> ReadTranscripts(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    std::string id = line.substr(0, tab);
    if (id.empty()) throw std::runtime_error(fmt::format("{}:{}: empty id", path.string(), number));
    if (!seen.insert(id).second) {
      throw std::runtime_error(fmt::format("{}:{}: duplicate id {}", path.string(), number, id));
    }
    out.emplace_back(std::move(id), tab == std::string::npos ? "" : line.substr(tab + 1));
  }
  return out;
}

DecodeResult Decode(const RunConfig& config) { return DecodeLoaded(config, Load(config)); }

void WriteDecodeOutputs(const fs::path& dir, const std::string& snapshot,
                        const RunConfig& config, const DecodeResult& result) {
  fs::create_directories(dir / "nbest");
  WriteText(dir / "config.txt", snapshot);
  const Vocabulary vocab =
      Vocabulary::Load(config.vocab.empty() ? fs::path(config.corpus) / "vocab.txt"
                                            : fs::path(config.vocab));
  std::string hyp;
  for (size_t i = 0; i < result.ids.size(); ++i) {
    search::NBestList list = result.nbest[i];
    if (config.nbest > 0 && list.size() > static_cast<size_t>(config.nbest)) {
      list.resize(config.nbest);
    }
    std::ostringstream nb;
    search::WriteNBest(nb, list, vocab);
    WriteText(dir / "nbest" / (result.ids[i] + ".txt"), nb.str());
    hyp += result.ids[i] + '\t' + result.hypotheses[i] + '\n';
  }
  WriteText(dir / "hyp.txt", hyp);
  WriteText(dir / "stats.txt", StatsText(result.stats));
}

void Bench(const RunConfig& config, const BenchGrid& grid, const std::string& snapshot,
           std::ostream& out) {
  const Setup s = Load(config);
  const auto refs = ReferencesFor(config, s.ids);
  std::string table = "beam\ttau\ttop_k\twer\tpeak_candidates\tscorer_evaluations\n";
  std::string timing = "beam\ttau\ttop_k\twall_seconds\trtf\n";
  out << fmt::format("{:>5} {:>6} {:>6} {:>8} {:>10} {:>16} {:>10}\n", "beam", "tau", "top_k",
                     "wer", "peak_cand", "scorer_evals", "rtf");
  for (const auto& beam : GridValues("grid_beam", grid.beam)) {
    for (const auto& tau : GridValues("grid_tau", grid.tau)) {
      for (const auto& k : GridValues("grid_top_k", grid.top_k)) {
        RunConfig row = config;
        try {
          row.beam = std::stoi(beam);
          row.compress_threshold = std::stod(tau);
          row.top_k = k == "all" ? s.vocab.size() : std::stoi(k);
        } catch (const std::logic_error&) {
          throw std::invalid_argument(fmt::format("bad grid point beam={} tau={} top_k={}", beam, tau, k));
        }
        row.Validate();
        const DecodeResult r = DecodeLoaded(row, s);
        const std::string wer = eval::FormatWer(Score(refs, r.hypotheses));
        table += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", row.beam, tau, k, wer,
                             r.stats.peak_candidates, r.stats.scorer_evaluations);
        timing += fmt::format("{}\t{}\t{}\t{:.6f}\t{:.6f}\n", row.beam, tau, k,
                              r.stats.wall_seconds, r.stats.rtf());
        out << fmt::format("{:>5} {:>6} {:>6} {:>8} {:>10} {:>16} {:>10.4f}\n", row.beam, tau,
                           k, wer, r.stats.peak_candidates, r.stats.scorer_evaluations,
                           r.stats.rtf());
      }
    }
  }
  const fs::path dir = config.output;
  if (dir.empty()) return;
  fs::create_directories(dir);
  WriteText(dir / "config.txt", snapshot);
  WriteText(dir / "bench.txt", table);
  WriteText(dir / "stats.txt", timing);
}

}  // namespace fusionkit::cli
