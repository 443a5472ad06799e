// Copyright 2026 The dialect-audit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Uncased BERT tokenization: text cleanup, whitespace and punctuation
// splitting, lowercasing with accent stripping, then greedy longest-match
// WordPiece against vocab.txt.
//
// Unicode case folding and accent stripping cover Latin-1, Latin Extended-A,
// Greek and Cyrillic capitals; other scripts pass through unchanged.

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dialect_audit/detail/utf8.hpp"
#include "dialect_audit/error.hpp"

namespace dialect_audit::bert {

namespace unicode {

inline bool is_whitespace(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' ||
         c == 0x00A0 || c == 0x1680 || (c >= 0x2000 && c <= 0x200A) ||
         c == 0x202F || c == 0x205F || c == 0x3000;
}

// Cc and Cf categories, except tab/newline/carriage return.
inline bool is_control(char32_t c) {
  if (c == U'\t' || c == U'\n' || c == U'\r') return false;
  if (c < 0x20 || (c >= 0x7F && c <= 0x9F)) return true;
  return c == 0x00AD || (c >= 0x0600 && c <= 0x0605) || c == 0x061C ||
         c == 0x06DD || c == 0x070F || c == 0x180E ||
         (c >= 0x200B && c <= 0x200F) || (c >= 0x202A && c <= 0x202E) ||
         (c >= 0x2060 && c <= 0x2064) || (c >= 0x2066 && c <= 0x206F) ||
         c == 0xFEFF || (c >= 0xFFF9 && c <= 0xFFFB) || c == 0xE0001 ||
         (c >= 0xE0020 && c <= 0xE007F);
}

// ASCII symbol ranges count as punctuation, as upstream does, plus the
// common Unicode P* blocks.
inline bool is_punctuation(char32_t c) {
  if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
      (c >= 123 && c <= 126)) {
    return true;
  }
  switch (c) {
    case 0x00A1: case 0x00A7: case 0x00AB: case 0x00B6: case 0x00B7:
    case 0x00BB: case 0x00BF: case 0x037E: case 0x0387:
    case 0xFF3F: case 0xFF5B: case 0xFF5D:
      return true;
    default:
      break;
  }
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x2043) ||
         (c >= 0x2045 && c <= 0x2051) || (c >= 0x2053 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
         (c >= 0x3014 && c <= 0x301F) || (c >= 0xFF01 && c <= 0xFF03) ||
         (c >= 0xFF05 && c <= 0xFF0A) || (c >= 0xFF0C && c <= 0xFF0F) ||
         c == 0xFF1A || c == 0xFF1B || c == 0xFF1F || c == 0xFF20 ||
         (c >= 0xFF3B && c <= 0xFF3D) || (c >= 0xFF5F && c <= 0xFF65);
}

inline bool is_cjk(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0x20000 && c <= 0x2A6DF) || (c >= 0x2A700 && c <= 0x2B73F) ||
         (c >= 0x2B740 && c <= 0x2B81F) || (c >= 0x2B820 && c <= 0x2CEAF) ||
         (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x2F800 && c <= 0x2FA1F);
}

inline bool is_combining_mark(char32_t c) {
  return (c >= 0x0300 && c <= 0x036F) || (c >= 0x1AB0 && c <= 0x1AFF) ||
         (c >= 0x1DC0 && c <= 0x1DFF) || (c >= 0x20D0 && c <= 0x20FF) ||
         (c >= 0xFE20 && c <= 0xFE2F);
}

// Lowercase followed by canonical decomposition with marks dropped.
// Returns 0 when the character vanishes entirely.
inline char32_t fold(char32_t c) {
  if (c < 0x80) return (c >= U'A' && c <= U'Z') ? c + 32 : c;
  if (is_combining_mark(c)) return 0;
  if (c >= 0xC0 && c <= 0xFF) {
    // clang-format off
    static constexpr char32_t kLatin1[64] = {
      'a','a','a','a','a','a',0xE6,'c','e','e','e','e','i','i','i','i',
      0xF0,'n','o','o','o','o','o',0xD7,0xF8,'u','u','u','u','y',0xFE,0xDF,
      'a','a','a','a','a','a',0xE6,'c','e','e','e','e','i','i','i','i',
      0xF0,'n','o','o','o','o','o',0xF7,0xF8,'u','u','u','u','y',0xFE,'y'};
    // clang-format on
    return kLatin1[c - 0xC0];
  }
  if (c >= 0x100 && c <= 0x17F) {
    // clang-format off
    static constexpr char32_t kLatinExtA[128] = {
      'a','a','a','a','a','a','c','c','c','c','c','c','c','c','d','d',
      0x111,0x111,'e','e','e','e','e','e','e','e','e','e','g','g','g','g',
      'g','g','g','g','h','h',0x127,0x127,'i','i','i','i','i','i','i','i',
      'i',0x131,0x133,0x133,'j','j','k','k',0x138,'l','l','l','l','l','l',0x140,
      0x140,0x142,0x142,'n','n','n','n','n','n',0x149,0x14B,0x14B,'o','o','o','o',
      'o','o',0x153,0x153,'r','r','r','r','r','r','s','s','s','s','s','s',
      's','s','t','t','t','t',0x167,0x167,'u','u','u','u','u','u','u','u',
      'u','u','u','u','w','w','y','y','y','z','z','z','z','z','z',0x17F};
    // clang-format on
    return kLatinExtA[c - 0x100];
  }
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;  // Greek
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;                 // Cyrillic
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

}  // namespace unicode

class WordPieceTokenizer {
 public:
  static constexpr std::size_t kMaxCharsPerWord = 100;

  explicit WordPieceTokenizer(std::vector<std::string> vocab)
      : vocab_(std::move(vocab)) {
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      ids_.emplace(vocab_[i], static_cast<std::int32_t>(i));
    }
    unk_ = require("[UNK]");
    cls_ = require("[CLS]");
    sep_ = require("[SEP]");
  }

  static WordPieceTokenizer from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(path, "cannot open vocabulary");
    std::vector<std::string> vocab;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      vocab.push_back(line);
    }
    try {
      return WordPieceTokenizer(std::move(vocab));
    } catch (const InputError& e) {
      throw LoadError(path, e.what());
    }
  }

  std::size_t vocab_size() const { return vocab_.size(); }

  /// Basic tokenization: the list of words and punctuation marks.
  std::vector<std::u32string> basic_tokens(std::string_view text) const {
    std::vector<std::u32string> out;
    std::u32string cur;
    const auto flush = [&] {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    };
    for (char32_t c : dialect_audit::detail::to_u32(text)) {
      if (c == 0 || c == 0xFFFD || unicode::is_control(c)) continue;
      if (unicode::is_whitespace(c)) {
        flush();
        continue;
      }
      if (unicode::is_cjk(c)) {
        flush();
        out.push_back(std::u32string(1, c));
        continue;
      }
      const char32_t f = unicode::fold(c);
      if (f == 0) continue;
      if (unicode::is_punctuation(f)) {
        flush();
        out.push_back(std::u32string(1, f));
        continue;
      }
      cur.push_back(f);
    }
    flush();
    return out;
  }

  /// [CLS] pieces... [SEP], truncated so the whole sequence fits max_len.
  std::vector<std::int32_t> encode(std::string_view text,
                                   std::size_t max_len) const {
    std::vector<std::int32_t> ids{cls_};
    const std::size_t budget = max_len >= 2 ? max_len - 2 : 0;
    for (const auto& word : basic_tokens(text)) {
      if (ids.size() - 1 >= budget) break;
      append_wordpieces(word, ids);
    }
    if (ids.size() - 1 > budget) ids.resize(budget + 1);
    ids.push_back(sep_);
    return ids;
  }

 private:
  std::int32_t require(const std::string& tok) const {
    auto it = ids_.find(tok);
    if (it == ids_.end()) {
      throw InputError("vocabulary lacks special token " + tok);
    }
    return it->second;
  }

  void append_wordpieces(const std::u32string& word,
                         std::vector<std::int32_t>& ids) const {
    if (word.size() > kMaxCharsPerWord) {
      ids.push_back(unk_);
      return;
    }
    std::vector<std::int32_t> pieces;
    std::size_t start = 0;
    while (start < word.size()) {
      std::size_t end = word.size();
      std::int32_t found = -1;
      while (start < end) {
        std::string piece = start > 0 ? "##" : "";
        piece += dialect_audit::detail::to_utf8(
            std::u32string_view(word).substr(start, end - start));
        if (auto it = ids_.find(piece); it != ids_.end()) {
          found = it->second;
          break;
        }
        --end;
      }
      if (found < 0) {
        ids.push_back(unk_);
        return;
      }
      pieces.push_back(found);
      start = end;
    }
    ids.insert(ids.end(), pieces.begin(), pieces.end());
  }

  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::int32_t> ids_;
  std::int32_t unk_ = 0, cls_ = 0, sep_ = 0;
};

}  // namespace dialect_audit::bert
