// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/core/vocabulary.h"

#include <fstream>
#include <sstream>

#include "fusionkit/core/binary_io.h"
#include "fusionkit/core/errors.h"

namespace fusionkit {
namespace {

constexpr std::string_view kWordMarker = "\xE2\x96\x81";  // U+2581

bool HasWhitespace(std::string_view s) {
  return s.find_first_of(" \t\r\n\v\f") != std::string_view::npos;
}

void SetFlag(Vocabulary::Entry& e, std::string_view flag, int line) {
  if (flag == "blank") e.blank = true;
  else if (flag == "bos") e.bos = true;
  else if (flag == "eos") e.eos = true;
  else if (flag == "unk") e.unk = true;
  else if (flag == "word_begin") e.word_begin = true;
  else
    throw FormatError("vocabulary line " + std::to_string(line) +
                      ": unknown flag '" + std::string(flag) + "'");
}

}  // namespace

Vocabulary::Vocabulary(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (int id = 0; id < size(); ++id) {
    const Entry& e = entries_[id];
    if (e.token.empty() || HasWhitespace(e.token)) {
      throw ValidationError("vocabulary: token " + std::to_string(id) +
                            " is empty or contains whitespace");
    }
    if (!index_.emplace(e.token, id).second) {
      throw ValidationError("vocabulary: duplicate token '" + e.token + "'");
    }
    auto claim = [&](bool flag, int& slot, const char* what) {
      if (!flag) return;
      if (slot >= 0) {
        throw ValidationError(std::string("vocabulary: more than one ") + what);
      }
      slot = id;
    };
    claim(e.blank, blank_id_, "blank");
    claim(e.bos, bos_id_, "bos");
    claim(e.eos, eos_id_, "eos");
    if (e.unk) {
      if (unk_id_) throw ValidationError("vocabulary: more than one unk");
      unk_id_ = id;
    }
    if (static_cast<int>(e.blank) + e.bos + e.eos + e.unk > 1) {
      throw ValidationError("vocabulary: token '" + e.token +
                            "' has more than one special role");
    }
    has_word_flags_ = has_word_flags_ || e.word_begin;
  }
  if (blank_id_ < 0 || bos_id_ < 0 || eos_id_ < 0) {
    throw ValidationError("vocabulary: blank, bos and eos are all required");
  }
}

Vocabulary Vocabulary::Read(std::istream& in) {
  std::vector<Entry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Entry e;
    const size_t tab = line.find('\t');
    e.token = line.substr(0, tab);
    if (tab != std::string::npos) {
      std::string_view flags = std::string_view(line).substr(tab + 1);
      while (!flags.empty()) {
        const size_t comma = flags.find(',');
        SetFlag(e, flags.substr(0, comma), line_no);
        if (comma == std::string_view::npos) break;
        flags.remove_prefix(comma + 1);
      }
    }
    entries.push_back(std::move(e));
  }
  try {
    return Vocabulary(std::move(entries));
  } catch (const ValidationError& err) {
    throw FormatError(err.what());
  }
}

Vocabulary Vocabulary::Load(const std::filesystem::path& path) {
  auto in = binary::OpenForRead(path, /*binary=*/false);
  return Read(in);
}

void Vocabulary::Write(std::ostream& out) const {
  for (const Entry& e : entries_) {
    out << e.token << '\t';
    const char* sep = "";
    auto flag = [&](bool on, const char* name) {
      if (!on) return;
      out << sep << name;
      sep = ",";
    };
    flag(e.blank, "blank");
    flag(e.bos, "bos");
    flag(e.eos, "eos");
    flag(e.unk, "unk");
    flag(e.word_begin, "word_begin");
    out << '\n';
  }
}

void Vocabulary::Save(const std::filesystem::path& path) const {
  auto out = binary::OpenForWrite(path, /*binary=*/false);
  Write(out);
}

std::string_view Vocabulary::Surface(int id) const {
  std::string_view s = token(id);
  if (s.size() > kWordMarker.size() && s.starts_with(kWordMarker)) {
    s.remove_prefix(kWordMarker.size());
  }
  return s;
}

std::optional<int> Vocabulary::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Vocabulary::EmittableLabels() const {
  std::vector<int> ids;
  for (int id = 0; id < size(); ++id) {
    if (!IsSpecial(id)) ids.push_back(id);
  }
  return ids;
}

std::vector<int> Vocabulary::LmOutcomes() const {
  std::vector<int> ids;
  for (int id = 0; id < size(); ++id) {
    if (id != blank_id_ && id != bos_id_) ids.push_back(id);
  }
  return ids;
}

std::string Vocabulary::Join(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (!out.empty()) out += ' ';
    out += token(id);
  }
  return out;
}

bool Vocabulary::operator==(const Vocabulary& other) const {
  if (size() != other.size()) return false;
  for (int id = 0; id < size(); ++id) {
    const Entry& a = entries_[id];
    const Entry& b = other.entries_[id];
    if (a.token != b.token || a.blank != b.blank || a.bos != b.bos ||
        a.eos != b.eos || a.unk != b.unk || a.word_begin != b.word_begin) {
      return false;
    }
  }
  return true;
}

}  // namespace fusionkit
