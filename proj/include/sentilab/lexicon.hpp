#pragma once
// Lexicon-based polarity / subjectivity scoring.
//
// Tokens are scanned left to right. Each Sentiment word opens a chunk that
// also takes up to two modifiers (Intensifier or Negator) immediately before
// it. For a chunk with base polarity p and intensifier product k:
//   no negator:  polarity = clamp(p * k, -1, 1)
//   negator:     polarity = clamp(p * -0.5 / k, -1, 1)
// Chunk subjectivity is the word's base subjectivity. A text scores the mean
// over its chunks; a text without chunks scores (0, 0, Neutral).

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sentilab/resources.hpp"
#include "sentilab/sentiment.hpp"
#include "sentilab/textprep.hpp"
#include "sentilab/util/io.hpp"

namespace sentilab {

enum class LexiconRole { Sentiment, Intensifier, Negator };

struct LexiconEntry {
  std::string word;
  double polarity = 0.0;
  double subjectivity = 0.0;
  double intensity = 1.0;
  LexiconRole role = LexiconRole::Sentiment;
};

struct LexiconDiagnostic {
  std::size_t line = 0;
  std::string message;
};

struct Lexicon {
  std::unordered_map<std::string, LexiconEntry> entries;
  std::string digest;  // of the source text
  std::vector<LexiconDiagnostic> diagnostics;

  const LexiconEntry* find(std::string_view word) const {
    auto it = entries.find(std::string(word));
    return it == entries.end() ? nullptr : &it->second;
  }
};

struct SentimentScore {
  double polarity = 0.0;
  double subjectivity = 0.0;
  Sentiment orientation = Sentiment::Neutral;
};

// Any nonzero polarity has an orientation; only exactly 0 is Neutral.
constexpr Sentiment orientation_of(double polarity) noexcept {
  if (polarity > 0.0) return Sentiment::Positive;
  if (polarity < 0.0) return Sentiment::Negative;
  return Sentiment::Neutral;
}

// Whitespace-separated lines: word role polarity subjectivity intensity.
// Bad lines are skipped with a diagnostic; a repeated word keeps its last entry.
inline Lexicon load_lexicon(std::string_view text) {
  Lexicon lex;
  lex.digest = digest_hex(text);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::istringstream fields{std::string(view)};
    std::string word, role, pol, subj, inten;
    if (!(fields >> word >> role >> pol >> subj >> inten)) {
      lex.diagnostics.push_back({line_no, "expected 5 fields"});
      continue;
    }
    LexiconEntry e;
    e.word = word;
    if (role == "Sentiment") e.role = LexiconRole::Sentiment;
    else if (role == "Intensifier") e.role = LexiconRole::Intensifier;
    else if (role == "Negator") e.role = LexiconRole::Negator;
    else {
      lex.diagnostics.push_back({line_no, "unknown role '" + role + "'"});
      continue;
    }
    if (!parse_double(pol, e.polarity) || !parse_double(subj, e.subjectivity) || !parse_double(inten, e.intensity)) {
      lex.diagnostics.push_back({line_no, "non-numeric field"});
      continue;
    }
    if (!(e.polarity >= -1.0 && e.polarity <= 1.0)) {
      lex.diagnostics.push_back({line_no, "polarity out of [-1,1]"});
      continue;
    }
    if (!(e.subjectivity >= 0.0 && e.subjectivity <= 1.0)) {
      lex.diagnostics.push_back({line_no, "subjectivity out of [0,1]"});
      continue;
    }
    if (!(e.intensity > 0.0) || !std::isfinite(e.intensity)) {
      lex.diagnostics.push_back({line_no, "intensity must be positive"});
      continue;
    }
    if (e.role == LexiconRole::Sentiment && e.intensity != 1.0) {
      lex.diagnostics.push_back({line_no, "sentiment entries must have intensity 1"});
      continue;
    }
    if (e.role != LexiconRole::Sentiment && e.polarity != 0.0) {
      lex.diagnostics.push_back({line_no, "modifier entries must have polarity 0"});
      continue;
    }
    if (lex.entries.contains(word)) lex.diagnostics.push_back({line_no, "duplicate word '" + word + "', last wins"});
    lex.entries[word] = std::move(e);
  }
  return lex;
}

inline const Lexicon& default_lexicon() {
  static const Lexicon lex = load_lexicon(resources::kLexicon);
  return lex;
}

inline SentimentScore score_text(const TokenList& tokens, const Lexicon& lexicon) {
  double pol_sum = 0.0, subj_sum = 0.0;
  std::size_t chunks = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const LexiconEntry* head = lexicon.find(tokens[i]);
    if (!head || head->role != LexiconRole::Sentiment) continue;
    double intensity = 1.0;
    bool negated = false;
    for (std::size_t back = 1; back <= 2 && back <= i; ++back) {
      const LexiconEntry* mod = lexicon.find(tokens[i - back]);
      if (!mod || mod->role == LexiconRole::Sentiment) break;
      if (mod->role == LexiconRole::Negator) negated = true;
      else intensity *= mod->intensity;
    }
    const double raw = negated ? head->polarity * -0.5 / intensity : head->polarity * intensity;
    pol_sum += std::clamp(raw, -1.0, 1.0);
    subj_sum += head->subjectivity;
    ++chunks;
  }
  if (chunks == 0) return {};
  SentimentScore s;
  s.polarity = pol_sum / static_cast<double>(chunks);
  s.subjectivity = subj_sum / static_cast<double>(chunks);
  s.orientation = orientation_of(s.polarity);
  return s;
}

// Raw text through the surface-form pipeline, then score_text.
inline SentimentScore score_raw_text(std::string_view text, const Lexicon& lexicon,
                                     const PipelineConfig& pipeline = lexicon_pipeline()) {
  return score_text(preprocess(text, pipeline), lexicon);
}

}  // namespace sentilab
