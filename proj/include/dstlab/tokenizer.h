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

#ifndef DSTLAB_TOKENIZER_H_
#define DSTLAB_TOKENIZER_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dstlab {

inline constexpr int kPadId = 0;
inline constexpr int kClsId = 1;
inline constexpr int kSepId = 2;
inline constexpr int kMaskId = 3;
inline constexpr int kUnkId = 4;
inline constexpr int kUserMarkerId = 5;
inline constexpr int kAgentMarkerId = 6;
inline constexpr int kNumSpecialTokens = 7;

// A token with the byte range [begin, end) it covers in the source text.
struct Token {
  int id = kUnkId;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Lowercased words split on whitespace and ASCII punctuation, joined by
// single spaces. Decode(Encode(x)) reproduces this form.
std::string NormalizeForTokens(std::string_view text);

// Whitespace+punctuation word-piece tokenizer. The vocabulary holds the
// reserved specials, every corpus word, and single-character pieces (plain
// and "##"-continuation) so that unseen words decompose instead of mapping
// to [UNK].
class Tokenizer {
 public:
  Tokenizer();

  static Tokenizer Build(std::span<const std::string> texts, int min_count = 1);
  static Tokenizer FromVocabText(std::string_view text);
  static Tokenizer Load(const std::filesystem::path& path);

  std::string VocabText() const;
  void Save(const std::filesystem::path& path) const;

  std::vector<int> Encode(std::string_view text) const;
  std::vector<Token> EncodeWithOffsets(std::string_view text) const;
  std::string Decode(std::span<const int> ids) const;

  int size() const { return static_cast<int>(pieces_.size()); }
  const std::string& piece(int id) const { return pieces_.at(static_cast<std::size_t>(id)); }
  std::optional<int> Find(std::string_view piece) const;
  static bool IsSpecial(int id) { return id < kNumSpecialTokens; }

  // Whole-word (non-special, non-continuation) entries.
  std::vector<std::string> Words() const;

 private:
  void Add(const std::string& piece);
  void AppendWordPieces(std::string_view word, std::size_t offset,
                        std::vector<Token>& out) const;

  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace dstlab

#endif  // DSTLAB_TOKENIZER_H_
