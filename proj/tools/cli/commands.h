// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fusionkit/search/nbest.h"

namespace fusionkit::cli {

// Everything a decoding run needs. Keys in config files and flags share the
// member names.
struct RunConfig {
  std::string strategy = "joint";  // ctc-greedy, time-sync, delayed-fusion, joint
  std::string corpus;              // directory with refs.txt and <id>.fkpg/.fkeo
  std::string vocab;               // defaults to <corpus>/vocab.txt
  std::string lm;
  std::string lm_kind = "ngram";  // ngram or table
  std::string decoder;            // weights file; empty means no decoder
  std::string interface = "aed";
  std::string prefix_attention = "causal";
  std::string prompt;  // space-separated tokens
  std::string downsample = "concat";
  int downsample_factor = 1;
  double adapter_threshold = 2.0;
  double ctc_weight = 1.0;
  double lm_weight = 0.5;
  double decoder_weight = 0.5;
  int beam = 8;
  bool length_norm = false;
  double max_len_factor = 1.0;
  int top_k = 0;                    // 0 disables top-k pruning
  double compress_threshold = 0.0;  // 0 disables compression
  int nbest = 0;                    // lines per n-best file, 0 writes all
  int jobs = 1;
  std::string output;

  // Throws std::invalid_argument naming the offending key.
  void Validate() const;
};

struct Corpus {
  std::vector<std::string> ids;
  std::vector<std::string> references;  // empty strings without refs.txt
};

// Ids come from refs.txt (id\ttranscript) when present, otherwise from the
// sorted <id>.fkpg files.
Corpus ListCorpus(const std::filesystem::path& dir);

// Reads `id\ttext` lines; throws on duplicates or malformed lines.
std::vector<std::pair<std::string, std::string>> ReadTranscripts(
    const std::filesystem::path& path);

struct DecodeResult {
  std::vector<std::string> ids;
  std::vector<search::NBestList> nbest;
  std::vector<std::string> hypotheses;
  search::DecodeStats stats;
};

// Loads and validates every input before the first utterance is decoded.
// Errors name the failing utterance or file.
DecodeResult Decode(const RunConfig& config);

// Writes config.txt (the snapshot text), nbest/<id>.txt, hyp.txt and
// stats.txt. Only stats.txt holds timing.
void WriteDecodeOutputs(const std::filesystem::path& dir, const std::string& snapshot,
                        const RunConfig& config, const DecodeResult& result);

struct BenchGrid {
  std::string top_k = "0 all 31";  // "all" is the vocabulary size
  std::string tau = "0";
  std::string beam = "8";
};

// Decodes the corpus once per grid point and writes bench.txt (WER and
// counters) and stats.txt (timing). The table with RTF goes to `out`.
void Bench(const RunConfig& config, const BenchGrid& grid, const std::string& snapshot,
           std::ostream& out);

}  // namespace fusionkit::cli
