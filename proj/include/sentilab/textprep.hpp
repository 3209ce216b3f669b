#pragma once
// Text normalization and tokenization applied before featurization and
// lexicon scoring.
//
// normalize() reduces any UTF-8 string to lowercase ASCII letters separated by
// single spaces:
//   - URLs (scheme://... and www....) and markup tags <...> become separators
//   - apostrophes (ASCII ' and U+2019) are deleted so "don't" -> "dont"
//   - digits are deleted
//   - other punctuation and every code point above U+007F become separators
// The output alphabet is [a-z ], so normalize() is idempotent and tokens
// split from its output never contain digits, punctuation or whitespace.

#include <algorithm>
#include <cctype>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sentilab/porter.hpp"
#include "sentilab/resources.hpp"
#include "sentilab/util/io.hpp"

namespace sentilab {

using TokenList = std::vector<std::string>;
using StopwordSet = std::unordered_set<std::string>;
using SubstitutionTable = std::unordered_map<std::string, std::string>;

namespace textprep_detail {

inline bool is_url_char(unsigned char c) { return c > 0x20 && c < 0x7f && c != '"' && c != '<' && c != '>'; }

inline bool starts_url(std::string_view text, std::size_t i) {
  // scheme://
  std::size_t j = i;
  while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
  if (j > i && text.substr(j, 3) == "://") return true;
  if (text.size() - i >= 4) {
    const auto lower = [&](std::size_t k) { return static_cast<char>(std::tolower(static_cast<unsigned char>(text[k]))); };
    if (lower(i) == 'w' && lower(i + 1) == 'w' && lower(i + 2) == 'w' && text[i + 3] == '.') return true;
  }
  return false;
}

}  // namespace textprep_detail

inline std::string normalize(std::string_view text) {
  using namespace textprep_detail;
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  auto emit_separator = [&] { pending_space = !out.empty(); };

  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    const bool at_word_start = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
    if (at_word_start && std::isalpha(c) && starts_url(text, i)) {
      while (i < text.size() && is_url_char(static_cast<unsigned char>(text[i]))) ++i;
      emit_separator();
      continue;
    }
    if (c == '<') {
      const std::size_t close = text.find('>', i + 1);
      if (close != std::string_view::npos) {
        i = close + 1;
        emit_separator();
        continue;
      }
    }
    if (c == '\'') {
      ++i;
      continue;
    }
    if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        static_cast<unsigned char>(text[i + 2]) == 0x99) {  // U+2019
      i += 3;
      continue;
    }
    if (std::isdigit(c)) {
      ++i;
      continue;
    }
    if (c < 0x80 && std::isalpha(c)) {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
      ++i;
      continue;
    }
    if (c >= 0x80) {
      // Skip the whole UTF-8 sequence.
      std::size_t len = 1;
      if ((c & 0xE0) == 0xC0) len = 2;
      else if ((c & 0xF0) == 0xE0) len = 3;
      else if ((c & 0xF8) == 0xF0) len = 4;
      i += std::min(len, text.size() - i);
      emit_separator();
      continue;
    }
    ++i;
    emit_separator();
  }
  return out;
}

inline TokenList tokenize(std::string_view normalized) {
  TokenList tokens;
  std::size_t start = 0;
  while (start < normalized.size()) {
    std::size_t end = normalized.find(' ', start);
    if (end == std::string_view::npos) end = normalized.size();
    if (end > start) tokens.emplace_back(normalized.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

inline TokenList remove_stopwords(const TokenList& tokens, const StopwordSet& stoplist) {
  TokenList kept;
  kept.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!stoplist.contains(t)) kept.push_back(t);
  }
  return kept;
}

inline std::string stem(std::string_view token) { return porter_stem(token); }

// One word per line; blank lines and '#' comments ignored; entries lowercased.
inline StopwordSet parse_stopwords(std::string_view text) {
  StopwordSet words;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string_view w = trim(line);
    if (w.empty() || w.front() == '#') continue;
    std::string lower(w);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    words.insert(std::move(lower));
  }
  return words;
}

inline const StopwordSet& default_stopwords() {
  static const StopwordSet words = parse_stopwords(resources::kStopwords);
  return words;
}

// "token<TAB>replacement" per line. An empty replacement deletes the token;
// a multi-word replacement expands into several tokens.
inline SubstitutionTable parse_substitutions(std::string_view text) {
  SubstitutionTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw InputError("substitutions line " + std::to_string(line_no) + ": expected token<TAB>replacement");
    }
    table[std::string(trim(std::string_view(line).substr(0, tab)))] =
        std::string(trim(std::string_view(line).substr(tab + 1)));
  }
  return table;
}

struct PipelineConfig {
  bool remove_stopwords = true;
  bool apply_stemming = true;
  StopwordSet stopword_list = default_stopwords();
  SubstitutionTable substitutions;
};

inline TokenList apply_substitutions(const TokenList& tokens, const SubstitutionTable& table) {
  if (table.empty()) return tokens;
  TokenList out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto it = table.find(t);
    if (it == table.end()) {
      out.push_back(t);
      continue;
    }
    for (auto& piece : tokenize(normalize(it->second))) out.push_back(std::move(piece));
  }
  return out;
}

// normalize -> tokenize -> substitutions -> stopwords -> stemming.
inline TokenList preprocess(std::string_view text, const PipelineConfig& config) {
  TokenList tokens = apply_substitutions(tokenize(normalize(text)), config.substitutions);
  if (config.remove_stopwords) tokens = remove_stopwords(tokens, config.stopword_list);
  if (config.apply_stemming) {
    for (auto& t : tokens) t = stem(t);
  }
  return tokens;
}

// Surface-form pipeline for lexicon lookups: stopwords removed, no stemming.
inline PipelineConfig lexicon_pipeline() {
  PipelineConfig cfg;
  cfg.apply_stemming = false;
  return cfg;
}

}  // namespace sentilab
