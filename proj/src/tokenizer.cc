//
// Copyright 2026 The dstlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dstlab/tokenizer.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "dstlab/common.h"
#include "dstlab/schema.h"

namespace dstlab {
namespace {

const char* const kSpecialPieces[kNumSpecialTokens] = {
    "[PAD]", "[CLS]", "[SEP]", "[MASK]", "[UNK]", "[USR]", "[SYS]"};

struct Word {
  std::string text;  // lowercased
  std::size_t begin;
  std::size_t end;
};

bool IsPunct(unsigned char c) { return c < 128 && std::ispunct(c); }

std::vector<Word> SplitWords(std::string_view text) {
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (IsPunct(c)) {
      words.push_back({std::string(1, text[i]), i, i + 1});
      ++i;
      continue;
    }
    std::size_t j = i;
    std::string w;
    while (j < text.size()) {
      const auto cj = static_cast<unsigned char>(text[j]);
      if (std::isspace(cj) || IsPunct(cj)) break;
      w.push_back(static_cast<char>(std::tolower(cj)));
      ++j;
    }
    words.push_back({std::move(w), i, j});
    i = j;
  }
  return words;
}

}  // namespace

std::string NormalizeForTokens(std::string_view text) {
  std::string out;
  for (const Word& w : SplitWords(text)) {
    if (!out.empty()) out.push_back(' ');
    out += w.text;
  }
  return out;
}

Tokenizer::Tokenizer() {
  for (const char* p : kSpecialPieces) Add(p);
}

void Tokenizer::Add(const std::string& piece) {
  if (index_.count(piece)) return;
  index_.emplace(piece, static_cast<int>(pieces_.size()));
  pieces_.push_back(piece);
}

Tokenizer Tokenizer::Build(std::span<const std::string> texts, int min_count) {
  std::map<std::string, int> counts;
  std::set<std::string> chars;
  for (const std::string& t : texts) {
    for (const Word& w : SplitWords(t)) {
      ++counts[w.text];
      for (char c : w.text) chars.insert(std::string(1, c));
    }
  }
  std::vector<std::pair<std::string, int>> words(counts.begin(), counts.end());
  std::stable_sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  Tokenizer tok;
  for (const auto& [w, n] : words) {
    if (n >= min_count) tok.Add(w);
  }
  for (const std::string& c : chars) tok.Add(c);
  for (const std::string& c : chars) tok.Add("##" + c);
  return tok;
}

Tokenizer Tokenizer::FromVocabText(std::string_view text) {
  Tokenizer tok;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (row < static_cast<std::size_t>(kNumSpecialTokens)) {
      if (line != kSpecialPieces[row]) {
        throw Error("vocabulary must start with the reserved special tokens");
      }
    } else if (!line.empty()) {
      tok.Add(line);
    }
    ++row;
  }
  return tok;
}

Tokenizer Tokenizer::Load(const std::filesystem::path& path) {
  return FromVocabText(ReadFile(path));
}

std::string Tokenizer::VocabText() const {
  std::string out;
  for (const std::string& p : pieces_) out += p + "\n";
  return out;
}

void Tokenizer::Save(const std::filesystem::path& path) const {
  WriteFile(path, VocabText());
}

std::optional<int> Tokenizer::Find(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Tokenizer::AppendWordPieces(std::string_view word, std::size_t offset,
                                 std::vector<Token>& out) const {
  if (auto id = Find(word)) {
    out.push_back({*id, offset, offset + word.size()});
    return;
  }
  std::vector<Token> pieces;
  std::size_t start = 0;
  while (start < word.size()) {
    std::size_t end = word.size();
    std::optional<int> match;
    for (; end > start; --end) {
      std::string candidate(word.substr(start, end - start));
      if (start > 0) candidate = "##" + candidate;
      if ((match = Find(candidate))) break;
    }
    if (!match) {
      out.push_back({kUnkId, offset, offset + word.size()});
      return;
    }
    pieces.push_back({*match, offset + start, offset + end});
    start = end;
  }
  out.insert(out.end(), pieces.begin(), pieces.end());
}

std::vector<Token> Tokenizer::EncodeWithOffsets(std::string_view text) const {
  std::vector<Token> out;
  for (const Word& w : SplitWords(text)) AppendWordPieces(w.text, w.begin, out);
  return out;
}

std::vector<int> Tokenizer::Encode(std::string_view text) const {
  std::vector<int> ids;
  for (const Token& t : EncodeWithOffsets(text)) ids.push_back(t.id);
  return ids;
}

std::string Tokenizer::Decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    const std::string& p = piece(id);
    if (p.size() > 2 && p.compare(0, 2, "##") == 0) {
      out += p.substr(2);
      continue;
    }
    if (!out.empty()) out.push_back(' ');
    out += p;
  }
  return out;
}

std::vector<std::string> Tokenizer::Words() const {
  std::vector<std::string> words;
  for (std::size_t i = kNumSpecialTokens; i < pieces_.size(); ++i) {
    const std::string& p = pieces_[i];
    if (p.compare(0, 2, "##") == 0 && p.size() > 2) continue;
    words.push_back(p);
  }
  return words;
}

}  // namespace dstlab
