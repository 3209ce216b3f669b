#pragma once
// n-gram vocabularies and sparse TP / TF / TF-IDF document vectors.
//
// TF-IDF weight of term w in document D: count(w, D) * ln(C / df(w)), where C
// is the number of training documents and df(w) the number of them that
// contain w. No smoothing: a term present in every document weighs 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sentilab/textprep.hpp"
#include "sentilab/util/error.hpp"
#include "sentilab/util/io.hpp"

namespace sentilab {

enum class WeightScheme { TP, TF, TFIDF };

constexpr std::string_view to_string(WeightScheme s) noexcept {
  switch (s) {
    case WeightScheme::TP: return "TP";
    case WeightScheme::TF: return "TF";
    case WeightScheme::TFIDF: return "TF-IDF";
  }
  return "?";
}

inline std::optional<WeightScheme> parse_weight_scheme(std::string_view s) {
  if (s == "TP" || s == "tp") return WeightScheme::TP;
  if (s == "TF" || s == "tf") return WeightScheme::TF;
  if (s == "TF-IDF" || s == "TFIDF" || s == "tfidf" || s == "tf-idf") return WeightScheme::TFIDF;
  return std::nullopt;
}

struct FeatureConfig {
  int ngram_order = 1;  // 1, 2 or 3; orders are exclusive (2 = bigrams only)
  WeightScheme scheme = WeightScheme::TFIDF;
  std::size_t min_document_frequency = 1;

  static std::size_t default_min_df(int order) { return order == 1 ? 1 : 2; }

  FeatureConfig() = default;
  FeatureConfig(int order, WeightScheme s) : FeatureConfig(order, s, default_min_df(order)) {}
  FeatureConfig(int order, WeightScheme s, std::size_t min_df)
      : ngram_order(order), scheme(s), min_document_frequency(min_df) {
    if (order < 1 || order > 3) throw PreconditionError("ngram_order must be 1, 2 or 3");
    if (min_df < 1) throw PreconditionError("min_document_frequency must be positive");
  }

  // "Unigram+TP", "Bigram+TF-IDF", ...
  std::string tag() const {
    static constexpr std::string_view names[] = {"Unigram", "Bigram", "Trigram"};
    return std::string(names[ngram_order - 1]) + "+" + std::string(to_string(scheme));
  }
};

// The nine (order, scheme) configurations in table order.
inline std::vector<FeatureConfig> all_feature_configs() {
  std::vector<FeatureConfig> out;
  for (int order = 1; order <= 3; ++order) {
    for (auto s : {WeightScheme::TP, WeightScheme::TF, WeightScheme::TFIDF}) out.emplace_back(order, s);
  }
  return out;
}

inline std::optional<FeatureConfig> parse_feature_tag(std::string_view tag) {
  for (const auto& cfg : all_feature_configs()) {
    if (cfg.tag() == tag) return cfg;
  }
  return std::nullopt;
}

inline std::vector<std::string> extract_ngrams(const TokenList& tokens, int n) {
  if (n < 1) throw PreconditionError("n-gram order must be >= 1");
  std::vector<std::string> grams;
  const auto order = static_cast<std::size_t>(n);
  if (tokens.size() < order) return grams;
  grams.reserve(tokens.size() - order + 1);
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    std::string g = tokens[i];
    for (std::size_t k = 1; k < order; ++k) {
      g.push_back(' ');
      g += tokens[i + k];
    }
    grams.push_back(std::move(g));
  }
  return grams;
}

class Vocabulary {
 public:
  Vocabulary() = default;

  // terms must be strictly increasing; df[i] in [1, corpus_size].
  Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> df, std::size_t corpus_size, int ngram_order)
      : terms_(std::move(terms)), df_(std::move(df)), corpus_size_(corpus_size), ngram_order_(ngram_order) {
    if (terms_.size() != df_.size()) throw PreconditionError("vocabulary: term/df size mismatch");
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (i > 0 && !(terms_[i - 1] < terms_[i])) throw InputError("vocabulary: terms not strictly sorted");
      if (df_[i] < 1 || df_[i] > corpus_size_) throw InputError("vocabulary: df out of range for '" + terms_[i] + "'");
      index_.emplace(terms_[i], static_cast<std::uint32_t>(i));
    }
  }

  std::size_t size() const noexcept { return terms_.size(); }
  std::size_t corpus_size() const noexcept { return corpus_size_; }
  int ngram_order() const noexcept { return ngram_order_; }
  const std::string& term(std::size_t i) const { return terms_.at(i); }
  std::size_t document_frequency(std::size_t i) const { return df_.at(i); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }

  std::optional<std::uint32_t> index_of(std::string_view term) const {
    auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  double idf(std::size_t i) const {
    return std::log(static_cast<double>(corpus_size_) / static_cast<double>(df_.at(i)));
  }

  // Plain-text export: "C=<corpus_size>" then "term<TAB>df" per line in index order.
  std::string export_text() const {
    std::string out = "C=" + std::to_string(corpus_size_) + "\n";
    for (std::size_t i = 0; i < terms_.size(); ++i) out += terms_[i] + "\t" + std::to_string(df_[i]) + "\n";
    return out;
  }

  static Vocabulary import_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line.rfind("C=", 0) != 0) throw InputError("vocabulary: missing C=<n> header");
    std::size_t corpus = 0;
    if (!parse_int(trim(std::string_view(line).substr(2)), corpus)) throw InputError("vocabulary: bad header");
    std::vector<std::string> terms;
    std::vector<std::size_t> df;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto tab = line.rfind('\t');
      std::size_t count = 0;
      if (tab == std::string::npos || !parse_int(std::string_view(line).substr(tab + 1), count)) {
        throw InputError("vocabulary line " + std::to_string(line_no) + ": expected term<TAB>df");
      }
      terms.push_back(line.substr(0, tab));
      df.push_back(count);
    }
    int order = 1;
    if (!terms.empty()) order = 1 + static_cast<int>(std::count(terms[0].begin(), terms[0].end(), ' '));
    return Vocabulary(std::move(terms), std::move(df), corpus, order);
  }

  std::string hash() const { return digest_hex(export_text()); }

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::size_t corpus_size_ = 0;
  int ngram_order_ = 1;
};

inline Vocabulary build_vocabulary(std::span<const TokenList> corpus, const FeatureConfig& config) {
  if (corpus.empty()) throw PreconditionError("build_vocabulary: empty corpus");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    auto grams = extract_ngrams(doc, config.ngram_order);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++df[std::move(g)];
  }
  std::vector<std::string> terms;
  std::vector<std::size_t> counts;
  for (auto& [term, count] : df) {
    if (count < config.min_document_frequency) continue;
    terms.push_back(term);
    counts.push_back(count);
  }
  return Vocabulary(std::move(terms), std::move(counts), corpus.size(), config.ngram_order);
}

struct SparseEntry {
  std::uint32_t index = 0;
  double weight = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Sorted sparse vector; indices strictly increasing.
struct DocumentVector {
  std::vector<SparseEntry> entries;
  double l2_norm = 0.0;

  static DocumentVector from_entries(std::vector<SparseEntry> entries) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    DocumentVector v;
    v.entries = std::move(entries);
    double sq = 0.0;
    for (const auto& e : v.entries) sq += e.weight * e.weight;
    v.l2_norm = std::sqrt(sq);
    return v;
  }

  bool empty() const noexcept { return entries.empty(); }

  friend bool operator==(const DocumentVector&, const DocumentVector&) = default;
};

inline double dot(const DocumentVector& v, std::span<const double> dense) {
  double s = 0.0;
  for (const auto& e : v.entries) s += e.weight * dense[e.index];
  return s;
}

inline double dot(const DocumentVector& a, const DocumentVector& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.entries.size() && j < b.entries.size()) {
    if (a.entries[i].index < b.entries[j].index) ++i;
    else if (a.entries[i].index > b.entries[j].index) ++j;
    else s += a.entries[i++].weight * b.entries[j++].weight;
  }
  return s;
}

// Zero-norm operands have similarity 0.
inline double cosine_similarity(const DocumentVector& a, const DocumentVector& b) {
  if (a.l2_norm == 0.0 || b.l2_norm == 0.0) return 0.0;
  return dot(a, b) / (a.l2_norm * b.l2_norm);
}

// Out-of-vocabulary grams are ignored.
inline DocumentVector vectorize(const TokenList& tokens, const Vocabulary& vocab, WeightScheme scheme) {
  std::map<std::uint32_t, std::size_t> counts;
  for (const auto& g : extract_ngrams(tokens, vocab.ngram_order())) {
    if (auto idx = vocab.index_of(g)) ++counts[*idx];
  }
  std::vector<SparseEntry> entries;
  entries.reserve(counts.size());
  for (const auto& [idx, count] : counts) {
    double w = 0.0;
    switch (scheme) {
      case WeightScheme::TP: w = 1.0; break;
      case WeightScheme::TF: w = static_cast<double>(count); break;
      case WeightScheme::TFIDF: w = static_cast<double>(count) * vocab.idf(idx); break;
    }
    entries.push_back({idx, w});
  }
  return DocumentVector::from_entries(std::move(entries));
}

}  // namespace sentilab
