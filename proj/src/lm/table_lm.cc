// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/lm/table_lm.h"

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "fusionkit/core/binary_io.h"
#include "fusionkit/core/errors.h"
#include "fusionkit/core/log_math.h"
#include "fusionkit/core/text.h"

namespace fusionkit::lm {
namespace {

constexpr double kNormTolerance = 1e-9;

std::string FormatDistribution(const Vocabulary& vocab,
                               const std::vector<double>& log_probs) {
  std::string out;
  for (int id = 0; id < vocab.size(); ++id) {
    if (log_probs[id] == kLogZero) continue;
    if (!out.empty()) out += ',';
    out += fmt::format("{}={:.17g}", vocab.token(id), log_probs[id]);
  }
  return out;
}

std::vector<double> ParseDistribution(const Vocabulary& vocab,
                                      std::string_view text, int line) {
  std::vector<double> log_probs(vocab.size(), kLogZero);
  auto fail = [&](const std::string& what) {
    return FormatError("tablelm line " + std::to_string(line) + ": " + what);
  };
  while (!text.empty()) {
    const size_t comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    const size_t eq = item.rfind('=');
    if (eq == std::string_view::npos) throw fail("expected token=logp");
    auto id = vocab.Find(item.substr(0, eq));
    if (!id) throw fail("unknown token '" + std::string(item.substr(0, eq)) + "'");
    const std::string num(item.substr(eq + 1));
    char* end = nullptr;
    const double v = std::strtod(num.c_str(), &end);
    if (num.empty() || end != num.c_str() + num.size()) throw fail("bad number");
    log_probs[*id] = v;
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return log_probs;
}

}  // namespace

TableLM::TableLM(Vocabulary vocab, std::vector<double> default_log_probs)
    : vocab_(std::move(vocab)), default_(std::move(default_log_probs)) {
  Check(default_);
}

TableLM TableLM::Uniform(Vocabulary vocab) {
  const auto outcomes = vocab.LmOutcomes();
  std::vector<double> lp(vocab.size(), kLogZero);
  for (int id : outcomes) lp[id] = -std::log(static_cast<double>(outcomes.size()));
  return TableLM(std::move(vocab), std::move(lp));
}

void TableLM::Check(const std::vector<double>& log_probs) const {
  if (static_cast<int>(log_probs.size()) != vocab_.size()) {
    throw std::invalid_argument("tablelm: distribution size " +
                                std::to_string(log_probs.size()) +
                                " does not match vocabulary size " +
                                std::to_string(vocab_.size()));
  }
  if (log_probs[vocab_.blank_id()] != kLogZero ||
      log_probs[vocab_.bos_id()] != kLogZero) {
    throw std::invalid_argument("tablelm: blank and bos must have probability 0");
  }
  for (double v : log_probs) {
    if (std::isnan(v) || v > 0.0) {
      throw std::invalid_argument("tablelm: invalid log-probability");
    }
  }
  const double total = std::exp(LogSumExp(log_probs));
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw std::invalid_argument(fmt::format(
        "tablelm: distribution sums to {:.12g}, not 1", total));
  }
}

void TableLM::Set(std::vector<int> context, std::vector<double> log_probs) {
  Check(log_probs);
  for (int id : context) {
    if (id < 0 || id >= vocab_.size()) {
      throw std::out_of_range("tablelm: context id out of range");
    }
  }
  max_context_ = std::max(max_context_, context.size());
  table_[std::move(context)] = std::move(log_probs);
}

std::vector<double> TableLM::NextLogProbs(std::span<const int> history) const {
  std::vector<int> full;
  full.reserve(history.size() + 1);
  full.push_back(vocab_.bos_id());
  full.insert(full.end(), history.begin(), history.end());
  std::vector<int> key;
  for (size_t len = std::min(max_context_, full.size()); len > 0; --len) {
    key.assign(full.end() - len, full.end());
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
  }
  return default_;
}

void TableLM::Write(std::ostream& out) const {
  out << "fusionkit-tablelm 1\n";
  out << "vocab " << vocab_.size() << '\n';
  vocab_.Write(out);
  out << "default\t\t" << FormatDistribution(vocab_, default_) << '\n';
  for (const auto& [context, lp] : table_) {
    out << "context\t" << vocab_.Join(context) << '\t'
        << FormatDistribution(vocab_, lp) << '\n';
  }
}

void TableLM::Save(const std::filesystem::path& path) const {
  auto out = binary::OpenForWrite(path, /*binary=*/false);
  Write(out);
}

TableLM TableLM::Read(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto next = [&]() {
    if (!std::getline(in, line)) throw FormatError("tablelm: truncated file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };
  next();
  if (line != "fusionkit-tablelm 1") throw FormatError("tablelm: bad magic line");
  next();
  int vsize = 0;
  if (!line.starts_with("vocab ")) throw FormatError("tablelm: expected 'vocab'");
  try {
    vsize = std::stoi(line.substr(6));
  } catch (const std::logic_error&) {
    throw FormatError("tablelm: bad vocabulary size");
  }
  if (vsize < 3) throw FormatError("tablelm: bad vocabulary size");
  std::stringstream vocab_text;
  for (int i = 0; i < vsize; ++i) {
    next();
    vocab_text << line << '\n';
  }
  Vocabulary vocab = Vocabulary::Read(vocab_text);

  auto fields = [&](const std::string& l) {
    const size_t t1 = l.find('\t');
    const size_t t2 = t1 == std::string::npos ? t1 : l.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw FormatError("tablelm line " + std::to_string(line_no) +
                        ": expected 3 tab-separated fields");
    }
    return std::array<std::string, 3>{l.substr(0, t1), l.substr(t1 + 1, t2 - t1 - 1),
                                      l.substr(t2 + 1)};
  };

  next();
  auto head = fields(line);
  if (head[0] != "default") throw FormatError("tablelm: expected 'default' line");
  auto wrap = [&](auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      throw FormatError("tablelm line " + std::to_string(line_no) + ": " + e.what());
    }
  };
  std::optional<TableLM> model;
  wrap([&] {
    model.emplace(vocab, ParseDistribution(vocab, head[2], line_no));
  });
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = fields(line);
    if (f[0] != "context") {
      throw FormatError("tablelm line " + std::to_string(line_no) +
                        ": expected 'context'");
    }
    std::vector<int> context;
    for (const std::string& tok : SplitWhitespace(f[1])) {
      auto id = vocab.Find(tok);
      if (!id) {
        throw FormatError("tablelm line " + std::to_string(line_no) +
                          ": unknown token '" + tok + "'");
      }
      context.push_back(*id);
    }
    wrap([&] { model->Set(context, ParseDistribution(vocab, f[2], line_no)); });
  }
  return std::move(*model);
}

TableLM TableLM::Load(const std::filesystem::path& path) {
  auto in = binary::OpenForRead(path, /*binary=*/false);
  return Read(in);
}

}  // namespace fusionkit::lm
