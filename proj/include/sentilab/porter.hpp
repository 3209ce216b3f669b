#pragma once
// Porter suffix-stripping stemmer, original 1980 rule set (steps 1a-5b).
// Input must be lowercase ASCII letters; anything else is returned unchanged.

#include <string>
#include <string_view>

namespace sentilab {

namespace porter_detail {

inline bool is_vowel_letter(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// y is a consonant at the start of a word or after a vowel, i.e. it takes
// the opposite of whatever precedes it.
inline bool is_consonant(std::string_view w, std::size_t i) {
  if (is_vowel_letter(w[i])) return false;
  if (w[i] != 'y' || i == 0) return true;
  return !is_consonant(w, i - 1);
}

// Number of VC sequences in [C](VC)^m[V].
inline int measure(std::string_view stem) {
  int m = 0;
  bool prev_vowel = false;
  for (std::size_t i = 0; i < stem.size(); ++i) {
    const bool vowel = !is_consonant(stem, i);
    if (prev_vowel && !vowel) ++m;
    prev_vowel = vowel;
  }
  return m;
}

inline bool contains_vowel(std::string_view stem) {
  for (std::size_t i = 0; i < stem.size(); ++i) {
    if (!is_consonant(stem, i)) return true;
  }
  return false;
}

inline bool ends_double_consonant(std::string_view w) {
  const std::size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

// *o: stem ends consonant-vowel-consonant and the final consonant is not w, x or y.
inline bool ends_cvc(std::string_view w) {
  const std::size_t n = w.size();
  return n >= 3 && is_consonant(w, n - 3) && !is_consonant(w, n - 2) && is_consonant(w, n - 1) && w[n - 1] != 'w' &&
         w[n - 1] != 'x' && w[n - 1] != 'y';
}

inline bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

enum class Cond { None, MGt0, MGt1, HasVowel, MGt1AndSorT };

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
  Cond cond;
};

inline bool holds(Cond c, std::string_view stem) {
  switch (c) {
    case Cond::None: return true;
    case Cond::MGt0: return measure(stem) > 0;
    case Cond::MGt1: return measure(stem) > 1;
    case Cond::HasVowel: return contains_vowel(stem);
    case Cond::MGt1AndSorT: return measure(stem) > 1 && !stem.empty() && (stem.back() == 's' || stem.back() == 't');
  }
  return false;
}

// The first rule whose suffix matches decides the step, whether or not its
// condition holds. Rule tables list longer suffixes before their tails.
template <std::size_t N>
void apply_first_match(std::string& w, const Rule (&rules)[N]) {
  for (const Rule& r : rules) {
    if (!ends_with(w, r.suffix)) continue;
    const std::string_view stem = std::string_view(w).substr(0, w.size() - r.suffix.size());
    if (holds(r.cond, stem)) w = std::string(stem) + std::string(r.replacement);
    return;
  }
}

inline void step1a(std::string& w) {
  static constexpr Rule rules[] = {
      {"sses", "ss", Cond::None}, {"ies", "i", Cond::None}, {"ss", "ss", Cond::None}, {"s", "", Cond::None}};
  apply_first_match(w, rules);
}

inline void step1b(std::string& w) {
  if (ends_with(w, "eed")) {
    if (measure(std::string_view(w).substr(0, w.size() - 3)) > 0) w.pop_back();
    return;
  }
  std::string_view removed;
  for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
    if (ends_with(w, suffix) && contains_vowel(std::string_view(w).substr(0, w.size() - suffix.size()))) {
      removed = suffix;
      break;
    }
  }
  if (removed.empty()) return;
  w.resize(w.size() - removed.size());
  if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
    w.push_back('e');
  } else if (ends_double_consonant(w)) {
    const char last = w.back();
    if (last != 'l' && last != 's' && last != 'z') w.pop_back();
  } else if (measure(w) == 1 && ends_cvc(w)) {
    w.push_back('e');
  }
}

inline void step1c(std::string& w) {
  static constexpr Rule rules[] = {{"y", "i", Cond::HasVowel}};
  apply_first_match(w, rules);
}

inline void step2(std::string& w) {
  static constexpr Rule rules[] = {
      {"ational", "ate", Cond::MGt0}, {"tional", "tion", Cond::MGt0}, {"enci", "ence", Cond::MGt0},
      {"anci", "ance", Cond::MGt0},   {"izer", "ize", Cond::MGt0},    {"abli", "able", Cond::MGt0},
      {"alli", "al", Cond::MGt0},     {"entli", "ent", Cond::MGt0},   {"eli", "e", Cond::MGt0},
      {"ousli", "ous", Cond::MGt0},   {"ization", "ize", Cond::MGt0}, {"ation", "ate", Cond::MGt0},
      {"ator", "ate", Cond::MGt0},    {"alism", "al", Cond::MGt0},    {"iveness", "ive", Cond::MGt0},
      {"fulness", "ful", Cond::MGt0}, {"ousness", "ous", Cond::MGt0}, {"aliti", "al", Cond::MGt0},
      {"iviti", "ive", Cond::MGt0},   {"biliti", "ble", Cond::MGt0},
  };
  apply_first_match(w, rules);
}

inline void step3(std::string& w) {
  static constexpr Rule rules[] = {
      {"icate", "ic", Cond::MGt0}, {"ative", "", Cond::MGt0}, {"alize", "al", Cond::MGt0}, {"iciti", "ic", Cond::MGt0},
      {"ical", "ic", Cond::MGt0},  {"ful", "", Cond::MGt0},   {"ness", "", Cond::MGt0},
  };
  apply_first_match(w, rules);
}

inline void step4(std::string& w) {
  static constexpr Rule rules[] = {
      {"al", "", Cond::MGt1},   {"ance", "", Cond::MGt1},  {"ence", "", Cond::MGt1},
      {"er", "", Cond::MGt1},   {"ic", "", Cond::MGt1},    {"able", "", Cond::MGt1},
      {"ible", "", Cond::MGt1}, {"ant", "", Cond::MGt1},   {"ement", "", Cond::MGt1},
      {"ment", "", Cond::MGt1}, {"ent", "", Cond::MGt1},   {"ion", "", Cond::MGt1AndSorT},
      {"ou", "", Cond::MGt1},   {"ism", "", Cond::MGt1},   {"ate", "", Cond::MGt1},
      {"iti", "", Cond::MGt1},  {"ous", "", Cond::MGt1},   {"ive", "", Cond::MGt1},
      {"ize", "", Cond::MGt1},
  };
  apply_first_match(w, rules);
}

inline void step5a(std::string& w) {
  if (!ends_with(w, "e")) return;
  const std::string_view stem = std::string_view(w).substr(0, w.size() - 1);
  const int m = measure(stem);
  if (m > 1 || (m == 1 && !ends_cvc(stem))) w.pop_back();
}

inline void step5b(std::string& w) {
  if (ends_with(w, "ll") && measure(w) > 1) w.pop_back();
}

}  // namespace porter_detail

inline std::string porter_stem(std::string_view token) {
  for (char c : token) {
    if (c < 'a' || c > 'z') return std::string(token);
  }
  std::string w(token);
  if (w.empty()) return w;
  using namespace porter_detail;
  step1a(w);
  step1b(w);
  step1c(w);
  step2(w);
  step3(w);
  step4(w);
  step5a(w);
  step5b(w);
  return w;
}

}  // namespace sentilab
