// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/lm/ngram.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "fusionkit/core/binary_io.h"
#include "fusionkit/core/errors.h"
#include "fusionkit/core/log_math.h"
#include "fusionkit/core/text.h"

namespace fusionkit::lm {
namespace {

constexpr double kLn10 = 2.302585092994045684;

bool ParseDouble(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

int TokenId(const Vocabulary& vocab, const std::string& tok, int line) {
  auto id = vocab.Find(tok);
  if (!id) {
    throw FormatError("ngram line " + std::to_string(line) + ": unknown token '" +
                      tok + "'");
  }
  return *id;
}

}  // namespace

NGramModel::NGramModel(Vocabulary vocab, int order, double backoff_factor)
    : vocab_(std::move(vocab)),
      order_(order),
      backoff_factor_(backoff_factor),
      unigram_log10_(vocab_.size(), kLogZero) {}

NGramModel NGramModel::Train(const Vocabulary& vocab,
                             const std::vector<std::vector<int>>& corpus,
                             int order, double backoff_factor) {
  if (order < 1) throw std::invalid_argument("ngram: order must be >= 1");
  if (corpus.empty()) throw std::invalid_argument("ngram: empty training corpus");
  if (!(backoff_factor > 0.0 && backoff_factor <= 1.0)) {
    throw std::invalid_argument("ngram: backoff factor must be in (0, 1]");
  }
  NGramModel model(vocab, order, backoff_factor);

  std::vector<double> unigram_counts(vocab.size(), 0.0);
  std::map<std::vector<int>, std::map<int, double>> counts;
  double total = 0.0;
  for (const auto& sentence : corpus) {
    std::vector<int> seq{vocab.bos_id()};
    for (int id : sentence) {
      if (id < 0 || id >= vocab.size() || vocab.IsSpecial(id)) {
        throw std::invalid_argument("ngram: corpus contains id " +
                                    std::to_string(id) +
                                    " which is not an ordinary token");
      }
      seq.push_back(id);
    }
    seq.push_back(vocab.eos_id());
    for (size_t i = 1; i < seq.size(); ++i) {
      unigram_counts[seq[i]] += 1.0;
      total += 1.0;
      for (size_t j = 1; j < static_cast<size_t>(order) && j <= i; ++j) {
        counts[std::vector<int>(seq.begin() + (i - j), seq.begin() + i)][seq[i]] +=
            1.0;
      }
    }
  }

  const std::vector<int> outcomes = vocab.LmOutcomes();
  const double denom = total + static_cast<double>(outcomes.size());
  for (int w : outcomes) {
    model.unigram_log10_[w] = std::log10((unigram_counts[w] + 1.0) / denom);
  }

  // Each level needs the finished distributions of the level below.
  for (int len = 1; len < order; ++len) {
    for (auto& [context, successors] : counts) {
      if (static_cast<int>(context.size()) != len) continue;
      const auto lower =
          model.Distribution(std::span<const int>(context).subspan(1));
      double count = 0.0;
      double lower_seen = 0.0;
      for (const auto& [w, c] : successors) {
        count += c;
        lower_seen += std::exp(lower[w]);
      }
      const double z = 1.0 + backoff_factor * std::max(0.0, 1.0 - lower_seen);
      ContextEntry& entry = model.contexts_[context];
      for (const auto& [w, c] : successors) {
        entry.log10_probs[w] = std::log10(c / count / z);
      }
    }
    model.ComputeBackoffs();
  }
  return model;
}

void NGramModel::ComputeBackoffs() {
  for (int len = 1; len < order_; ++len) {
    for (auto& [context, entry] : contexts_) {
      if (static_cast<int>(context.size()) != len) continue;
      const auto lower = Distribution(std::span<const int>(context).subspan(1));
      double seen = 0.0;
      double lower_seen = 0.0;
      for (const auto& [w, lp] : entry.log10_probs) {
        seen += std::pow(10.0, lp);
        lower_seen += std::exp(lower[w]);
      }
      const double num = 1.0 - seen;
      const double den = 1.0 - lower_seen;
      entry.log_backoff = (num > 0.0 && den > 0.0) ? std::log(num / den) : kLogZero;
    }
  }
}

std::vector<double> NGramModel::Distribution(std::span<const int> context) const {
  std::vector<double> dist(vocab_.size(), kLogZero);
  for (int id = 0; id < vocab_.size(); ++id) {
    if (unigram_log10_[id] != kLogZero) dist[id] = unigram_log10_[id] * kLn10;
  }
  std::vector<int> key;
  for (size_t len = 1; len <= context.size(); ++len) {
    key.assign(context.end() - len, context.end());
    auto it = contexts_.find(key);
    if (it == contexts_.end()) break;
    const ContextEntry& entry = it->second;
    for (double& v : dist) v += entry.log_backoff;
    for (const auto& [w, lp] : entry.log10_probs) dist[w] = lp * kLn10;
  }
  dist[vocab_.blank_id()] = kLogZero;
  dist[vocab_.bos_id()] = kLogZero;
  return dist;
}

std::vector<double> NGramModel::NextLogProbs(std::span<const int> history) const {
  const size_t keep = std::min(history.size() + 1, static_cast<size_t>(order_ - 1));
  std::vector<int> context;
  context.reserve(keep);
  if (keep > history.size()) context.push_back(vocab_.bos_id());
  context.insert(context.end(), history.end() - std::min(keep, history.size()),
                 history.end());
  return Distribution(context);
}

void NGramModel::Write(std::ostream& out) const {
  out << "fusionkit-ngram 1\n";
  out << "order " << order_ << '\n';
  out << "backoff " << fmt::format("{:.17g}", backoff_factor_) << '\n';
  out << "vocab " << vocab_.size() << '\n';
  vocab_.Write(out);
  for (int id = 0; id < vocab_.size(); ++id) {
    if (unigram_log10_[id] == kLogZero) continue;
    out << fmt::format("1\t\t{}\t{:.17g}\n", vocab_.token(id), unigram_log10_[id]);
  }
  for (int len = 1; len < order_; ++len) {
    for (const auto& [context, entry] : contexts_) {
      if (static_cast<int>(context.size()) != len) continue;
      const std::string ctx = vocab_.Join(context);
      for (const auto& [w, lp] : entry.log10_probs) {
        out << fmt::format("{}\t{}\t{}\t{:.17g}\n", len + 1, ctx, vocab_.token(w),
                           lp);
      }
    }
  }
}

void NGramModel::Save(const std::filesystem::path& path) const {
  auto out = binary::OpenForWrite(path, /*binary=*/false);
  Write(out);
}

NGramModel NGramModel::Read(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto next = [&]() {
    if (!std::getline(in, line)) throw FormatError("ngram: truncated header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };
  auto keyed = [&](const std::string& key) {
    next();
    if (!line.starts_with(key + " ")) {
      throw FormatError("ngram line " + std::to_string(line_no) + ": expected '" +
                        key + "'");
    }
    return line.substr(key.size() + 1);
  };
  next();
  if (line != "fusionkit-ngram 1") throw FormatError("ngram: bad magic line");
  int order = 0;
  double alpha = 0.0;
  int vsize = 0;
  try {
    order = std::stoi(keyed("order"));
    if (!ParseDouble(keyed("backoff"), alpha)) throw FormatError("bad backoff");
    vsize = std::stoi(keyed("vocab"));
  } catch (const std::logic_error&) {
    throw FormatError("ngram line " + std::to_string(line_no) + ": bad number");
  }
  if (order < 1 || vsize < 3 || !(alpha > 0.0 && alpha <= 1.0)) {
    throw FormatError("ngram: invalid header values");
  }
  std::stringstream vocab_text;
  for (int i = 0; i < vsize; ++i) {
    next();
    vocab_text << line << '\n';
  }
  NGramModel model(Vocabulary::Read(vocab_text), order, alpha);
  const Vocabulary& vocab = model.vocab_;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = SplitTabs(line);
    if (fields.size() != 4) {
      throw FormatError("ngram line " + std::to_string(line_no) +
                        ": expected 4 tab-separated fields");
    }
    int n = 0;
    double lp = 0.0;
    try {
      n = std::stoi(fields[0]);
    } catch (const std::logic_error&) {
      n = 0;
    }
    if (n < 1 || n > order || !ParseDouble(fields[3], lp) || lp > 0.0) {
      throw FormatError("ngram line " + std::to_string(line_no) +
                        ": bad order or probability");
    }
    std::vector<int> context;
    for (const std::string& tok : SplitWhitespace(fields[1])) {
      context.push_back(TokenId(vocab, tok, line_no));
    }
    const int w = TokenId(vocab, fields[2], line_no);
    if (static_cast<int>(context.size()) != n - 1 || w == vocab.blank_id() ||
        w == vocab.bos_id()) {
      throw FormatError("ngram line " + std::to_string(line_no) +
                        ": context length or outcome is invalid");
    }
    if (n == 1) {
      model.unigram_log10_[w] = lp;
    } else {
      model.contexts_[context].log10_probs[w] = lp;
    }
  }
  for (int w : vocab.LmOutcomes()) {
    if (model.unigram_log10_[w] == kLogZero) {
      throw FormatError("ngram: missing unigram for '" + vocab.token(w) + "'");
    }
  }
  model.ComputeBackoffs();
  return model;
}

NGramModel NGramModel::Load(const std::filesystem::path& path) {
  auto in = binary::OpenForRead(path, /*binary=*/false);
  return Read(in);
}

}  // namespace fusionkit::lm
