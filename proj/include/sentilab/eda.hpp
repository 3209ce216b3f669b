#pragma once
// Descriptive statistics over the app metadata and review corpora, and the
// rq1..rq8 bundle built from them (CSV tables plus a JSON summary).
//
// Installs are the parsed lower bounds ("10,000+" -> 10000), so install sums
// and correlations underestimate. Apps without a size are left out of every
// size statistic and counted.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentilab/corpus.hpp"
#include "sentilab/lexicon.hpp"
#include "sentilab/textprep.hpp"
#include "sentilab/util/csv.hpp"
#include "sentilab/util/error.hpp"
#include "sentilab/util/io.hpp"

namespace sentilab::eda {

struct CategoryRow {
  std::string category;
  std::size_t count = 0;
  std::size_t rated = 0;
  std::optional<double> mean_rating;
  std::optional<double> min_rating;
  std::optional<double> max_rating;
  std::uint64_t install_sum = 0;
};

struct CategoryStats {
  std::vector<CategoryRow> rows;  // sorted by category
  std::size_t apps = 0;
  std::size_t distinct_apps = 0;
  std::size_t distinct_categories = 0;
  std::size_t distinct_genres = 0;           // distinct Genres cells (e.g. "Casual;Pretend Play")
  std::size_t distinct_genre_tags = 0;       // distinct ';'-separated pieces
  std::size_t complete_records = 0;          // rating and both version columns present
  std::size_t distinct_genres_complete = 0;  // distinct Genres cells over complete records
  std::optional<double> mean_rating;               // over every rated row
  std::optional<double> mean_rating_distinct_apps;  // first row of each app name, rated ones
};

inline std::string genre_label(const AppRecord& a) {
  std::string out;
  for (const auto& g : a.genres) {
    if (!out.empty()) out += ';';
    out += g;
  }
  return out;
}

inline bool is_complete(const AppRecord& a) {
  return a.rating.has_value() && !a.current_version.empty() && !a.android_version.empty();
}

inline CategoryStats summarize_categories(std::span<const AppRecord> apps) {
  CategoryStats s;
  s.apps = apps.size();
  std::map<std::string, CategoryRow> by_cat;
  std::map<std::string, double> sums;
  std::set<std::string> names, genres, tags, genres_complete;
  double all_sum = 0.0, distinct_sum = 0.0;
  std::size_t all_n = 0, distinct_n = 0;
  for (const auto& a : apps) {
    auto& row = by_cat[a.category];
    row.category = a.category;
    ++row.count;
    row.install_sum += a.installs_lower_bound;
    const bool first = names.insert(a.name).second;
    genres.insert(genre_label(a));
    for (const auto& g : a.genres) tags.insert(g);
    if (is_complete(a)) {
      ++s.complete_records;
      genres_complete.insert(genre_label(a));
    }
    if (!a.rating) continue;
    const double r = *a.rating;
    ++row.rated;
    sums[a.category] += r;
    row.min_rating = row.min_rating ? std::min(*row.min_rating, r) : r;
    row.max_rating = row.max_rating ? std::max(*row.max_rating, r) : r;
    all_sum += r;
    ++all_n;
    if (first) {
      distinct_sum += r;
      ++distinct_n;
    }
  }
  for (auto& [cat, row] : by_cat) {
    // Clamp guards the mean against rounding just outside [min, max].
    if (row.rated) row.mean_rating = std::clamp(sums[cat] / static_cast<double>(row.rated), *row.min_rating, *row.max_rating);
    s.rows.push_back(row);
  }
  s.distinct_apps = names.size();
  s.distinct_categories = by_cat.size();
  s.distinct_genres = genres.size();
  s.distinct_genre_tags = tags.size();
  s.distinct_genres_complete = genres_complete.size();
  if (all_n) s.mean_rating = all_sum / static_cast<double>(all_n);
  if (distinct_n) s.mean_rating_distinct_apps = distinct_sum / static_cast<double>(distinct_n);
  return s;
}

struct TypeSplit {
  std::size_t free = 0;
  std::size_t paid = 0;

  std::size_t total() const noexcept { return free + paid; }
  double free_fraction() const { return static_cast<double>(free) / static_cast<double>(total()); }
  double paid_fraction() const { return static_cast<double>(paid) / static_cast<double>(total()); }
};

template <class Range>
TypeSplit type_split_of(const Range& types) {
  TypeSplit t;
  for (AppType x : types) ++(x == AppType::Free ? t.free : t.paid);
  if (t.total() == 0) throw PreconditionError("type_split: no records");
  return t;
}

inline TypeSplit type_split(std::span<const AppRecord> apps) {
  std::vector<AppType> types;
  for (const auto& a : apps) types.push_back(a.app_type);
  return type_split_of(types);
}

// First record of each app name only.
inline std::vector<AppRecord> distinct_apps(std::span<const AppRecord> apps) {
  std::set<std::string> seen;
  std::vector<AppRecord> out;
  for (const auto& a : apps)
    if (seen.insert(a.name).second) out.push_back(a);
  return out;
}

// Pairs with either side absent are dropped first. Returns nullopt when
// fewer than 2 pairs remain or either side has zero variance.
inline std::optional<double> pearson(std::span<const std::optional<double>> x, std::span<const std::optional<double>> y) {
  if (x.size() != y.size()) throw PreconditionError("pearson: length mismatch");
  std::vector<double> a, b;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] && y[i]) {
      a.push_back(*x[i]);
      b.push_back(*y[i]);
    }
  }
  if (a.size() < 2) return std::nullopt;
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  std::vector<std::optional<double>> a(x.begin(), x.end()), b(y.begin(), y.end());
  return pearson(std::span<const std::optional<double>>(a), std::span<const std::optional<double>>(b));
}

inline constexpr std::array<std::string_view, 5> kCorrelationVariables{"price", "installs", "size", "reviews_count",
                                                                      "rating"};

struct CorrelationMatrix {
  std::array<std::array<std::optional<double>, 5>, 5> values{};
  std::array<std::array<std::size_t, 5>, 5> pairs{};  // pairs used per cell
  std::size_t records = 0;
  std::size_t size_excluded = 0;
  std::size_t rating_excluded = 0;
};

inline CorrelationMatrix correlation_matrix(std::span<const AppRecord> apps) {
  CorrelationMatrix m;
  m.records = apps.size();
  std::array<std::vector<std::optional<double>>, 5> cols;
  for (const auto& a : apps) {
    cols[0].push_back(a.price_usd);
    cols[1].push_back(static_cast<double>(a.installs_lower_bound));
    cols[2].push_back(a.size_bytes ? std::optional<double>(static_cast<double>(*a.size_bytes)) : std::nullopt);
    cols[3].push_back(static_cast<double>(a.reviews_count));
    cols[4].push_back(a.rating);
    if (!a.size_bytes) ++m.size_excluded;
    if (!a.rating) ++m.rating_excluded;
  }
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = i; j < 5; ++j) {
      std::size_t n = 0;
      for (std::size_t k = 0; k < apps.size(); ++k) n += cols[i][k] && cols[j][k];
      auto r = pearson(std::span<const std::optional<double>>(cols[i]), std::span<const std::optional<double>>(cols[j]));
      if (i == j && r) r = 1.0;
      m.values[i][j] = m.values[j][i] = r;
      m.pairs[i][j] = m.pairs[j][i] = n;
    }
  }
  return m;
}

using WordFrequencyTable = std::vector<std::pair<std::string, std::size_t>>;

inline constexpr std::size_t kAllWords = std::numeric_limits<std::size_t>::max();

// Counts tokens of documents labeled `cls`; highest counts first, ties in
// lexicographic order.
inline WordFrequencyTable word_frequencies(std::span<const TokenList> docs, std::span<const Sentiment> labels,
                                           Sentiment cls, std::size_t top_k = kAllWords) {
  if (docs.size() != labels.size()) throw PreconditionError("word_frequencies: docs/labels length mismatch");
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (labels[i] != cls) continue;
    for (const auto& t : docs[i]) ++counts[t];
  }
  WordFrequencyTable out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

inline WordFrequencyTable word_frequencies(std::span<const LabeledDocument> docs, Sentiment cls,
                                           std::size_t top_k = kAllWords,
                                           const PipelineConfig& pipeline = lexicon_pipeline()) {
  std::vector<TokenList> tokens;
  std::vector<Sentiment> labels;
  for (const auto& d : docs) {
    if (d.label != cls) continue;
    tokens.push_back(preprocess(d.text, pipeline));
    labels.push_back(d.label);
  }
  return word_frequencies(tokens, labels, cls, top_k);
}

inline std::vector<SentimentScore> scatter_dump(std::span<const LabeledDocument> docs, const Lexicon& lexicon) {
  std::vector<SentimentScore> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(score_raw_text(d.text, lexicon));
  return out;
}

// Size bins of 10 MB, rating bins of 0.5 starting at 1.0 (5.0 falls in [4.5, 5.0]).
struct SizeRatingCell {
  std::size_t size_bin = 0;
  std::size_t rating_bin = 0;
  std::size_t count = 0;
  std::uint64_t install_sum = 0;
};

inline constexpr double kSizeBinBytes = 10.0 * 1024.0 * 1024.0;

struct SizeRatingTable {
  std::vector<SizeRatingCell> cells;  // non-empty cells, ordered by (size_bin, rating_bin)
  std::size_t size_excluded = 0;
  std::size_t rating_excluded = 0;
};

inline SizeRatingTable size_rating_table(std::span<const AppRecord> apps) {
  SizeRatingTable t;
  std::map<std::pair<std::size_t, std::size_t>, SizeRatingCell> cells;
  for (const auto& a : apps) {
    if (!a.size_bytes) {
      ++t.size_excluded;
      continue;
    }
    if (!a.rating) {
      ++t.rating_excluded;
      continue;
    }
    const auto sb = static_cast<std::size_t>(static_cast<double>(*a.size_bytes) / kSizeBinBytes);
    const auto rb = std::min<std::size_t>(7, static_cast<std::size_t>(std::max(0.0, (*a.rating - 1.0) / 0.5)));
    auto& c = cells[{sb, rb}];
    c.size_bin = sb;
    c.rating_bin = rb;
    ++c.count;
    c.install_sum += a.installs_lower_bound;
  }
  for (const auto& [k, c] : cells) t.cells.push_back(c);
  return t;
}

struct ContentTypeRow {
  std::string content_rating;
  AppType type = AppType::Free;
  std::size_t count = 0;
  std::size_t rated = 0;
  std::optional<double> mean_rating;
};

inline std::vector<ContentTypeRow> content_rating_table(std::span<const AppRecord> apps) {
  std::map<std::pair<std::string, int>, ContentTypeRow> rows;
  std::map<std::pair<std::string, int>, double> sums;
  for (const auto& a : apps) {
    const std::pair<std::string, int> key{a.content_rating, a.app_type == AppType::Free ? 0 : 1};
    auto& r = rows[key];
    r.content_rating = a.content_rating;
    r.type = a.app_type;
    ++r.count;
    if (a.rating) {
      ++r.rated;
      sums[key] += *a.rating;
    }
  }
  std::vector<ContentTypeRow> out;
  for (auto& [k, r] : rows) {
    if (r.rated) r.mean_rating = sums[k] / static_cast<double>(r.rated);
    out.push_back(r);
  }
  return out;
}

// ---- the rq1..rq8 bundle ----

struct EdaInputs {
  const std::vector<AppRecord>* apps = nullptr;
  const std::vector<LabeledDocument>* reviews = nullptr;  // Google reviews
  const std::vector<SarRecord>* survey = nullptr;
  const Lexicon* lexicon = nullptr;
  std::size_t top_k = 100;
};

struct EdaBundle {
  std::map<std::string, std::string> files;  // file name -> CSV text
  nlohmann::ordered_json summary;
};

namespace eda_detail {

inline std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json split_json(const TypeSplit& t) {
  return {{"free", t.free}, {"paid", t.paid}, {"free_fraction", t.free_fraction()}, {"paid_fraction", t.paid_fraction()}};
}

}  // namespace eda_detail

inline EdaBundle build_bundle(const EdaInputs& in) {
  using namespace eda_detail;
  EdaBundle b;
  auto& sum = b.summary;
  const Lexicon& lex = in.lexicon ? *in.lexicon : default_lexicon();
  const auto skipped = [](std::string_view needs) {
    return nlohmann::ordered_json{{"status", "skipped"}, {"reason", std::string("no ") + std::string(needs) + " input"}};
  };

  // Review documents from both sources, tagged.
  std::vector<LabeledDocument> docs;
  if (in.reviews) docs.insert(docs.end(), in.reviews->begin(), in.reviews->end());
  if (in.survey) {
    auto sar = documents_from_sar(*in.survey);
    docs.insert(docs.end(), sar.begin(), sar.end());
  }
  const bool have_apps = in.apps && !in.apps->empty();
  const bool have_docs = !docs.empty();

  if (have_apps) {
    const auto& apps = *in.apps;
    const auto cats = summarize_categories(apps);
    std::string csv = csv::format_row({"category", "count", "rated", "mean_rating", "min_rating", "max_rating", "install_sum"});
    for (const auto& r : cats.rows) {
      csv += csv::format_row({r.category, std::to_string(r.count), std::to_string(r.rated), opt(r.mean_rating),
                              opt(r.min_rating), opt(r.max_rating), std::to_string(r.install_sum)});
    }
    b.files["rq1_categories.csv"] = csv;
    sum["rq1"] = {{"status", "ok"},
                  {"source", "google_apps"},
                  {"file", "rq1_categories.csv"},
                  {"records", cats.apps},
                  {"distinct_apps", cats.distinct_apps},
                  {"distinct_categories", cats.distinct_categories},
                  {"distinct_genres", cats.distinct_genres},
                  {"distinct_genre_tags", cats.distinct_genre_tags},
                  {"complete_records", cats.complete_records},
                  {"distinct_genres_complete", cats.distinct_genres_complete},
                  {"mean_rating", opt_json(cats.mean_rating)},
                  {"mean_rating_distinct_apps", opt_json(cats.mean_rating_distinct_apps)}};
  } else {
    sum["rq1"] = skipped("apps");
  }

  if (have_apps || in.survey) {
    std::string csv = csv::format_row({"source", "scope", "free", "paid", "free_fraction", "paid_fraction"});
    auto rq2 = nlohmann::ordered_json{{"status", "ok"}, {"file", "rq2_types.csv"}};
    const auto add = [&](std::string_view source, std::string_view scope, const TypeSplit& t) {
      csv += csv::format_row({std::string(source), std::string(scope), std::to_string(t.free), std::to_string(t.paid),
                              format_double(t.free_fraction()), format_double(t.paid_fraction())});
      rq2[std::string(source)][std::string(scope)] = split_json(t);
    };
    if (have_apps) {
      add("google_apps", "rows", type_split(*in.apps));
      add("google_apps", "distinct_apps", type_split(distinct_apps(*in.apps)));
    }
    if (in.survey && !in.survey->empty()) {
      std::vector<AppType> types;
      for (const auto& s : *in.survey) types.push_back(s.app_type);
      add("sar", "rows", type_split_of(types));
    }
    b.files["rq2_types.csv"] = csv;
    sum["rq2"] = rq2;
  } else {
    sum["rq2"] = skipped("apps");
  }

  if (have_docs) {
    std::string csv = csv::format_row({"source", "label", "polarity", "subjectivity"});
    const auto scores = scatter_dump(docs, lex);
    std::size_t positive_side = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      csv += csv::format_row({std::string(to_string(docs[i].source)), std::string(to_string(docs[i].label)),
                              format_double(scores[i].polarity), format_double(scores[i].subjectivity)});
      positive_side += scores[i].polarity > 0.0;
    }
    b.files["rq3_scatter.csv"] = csv;
    sum["rq3"] = {{"status", "ok"},
                  {"source", in.survey ? (in.reviews ? "google_reviews+sar" : "sar") : "google_reviews"},
                  {"file", "rq3_scatter.csv"},
                  {"rows", docs.size()},
                  {"positive_polarity_rows", positive_side},
                  {"lexicon_digest", lex.digest}};
  } else {
    sum["rq3"] = skipped("review");
  }

  if (have_apps) {
    const auto t = size_rating_table(*in.apps);
    std::string csv = csv::format_row({"size_mb_lo", "size_mb_hi", "rating_lo", "rating_hi", "count", "install_sum"});
    for (const auto& c : t.cells) {
      csv += csv::format_row({std::to_string(c.size_bin * 10), std::to_string(c.size_bin * 10 + 10),
                              format_double(1.0 + 0.5 * static_cast<double>(c.rating_bin)),
                              format_double(1.5 + 0.5 * static_cast<double>(c.rating_bin)), std::to_string(c.count),
                              std::to_string(c.install_sum)});
    }
    b.files["rq4_size_rating.csv"] = csv;
    sum["rq4"] = {{"status", "ok"},
                  {"source", "google_apps"},
                  {"file", "rq4_size_rating.csv"},
                  {"size_excluded", t.size_excluded},
                  {"rating_excluded", t.rating_excluded}};

    std::string csv5 = csv::format_row({"content_rating", "type", "count", "rated", "mean_rating"});
    for (const auto& r : content_rating_table(*in.apps)) {
      csv5 += csv::format_row({r.content_rating, std::string(to_string(r.type)), std::to_string(r.count),
                               std::to_string(r.rated), opt(r.mean_rating)});
    }
    b.files["rq5_content_rating.csv"] = csv5;
    sum["rq5"] = {{"status", "ok"}, {"source", "google_apps"}, {"file", "rq5_content_rating.csv"}};
  } else {
    sum["rq4"] = skipped("apps");
    sum["rq5"] = skipped("apps");
  }

  const std::array<std::pair<const char*, Sentiment>, 2> clouds{{{"rq6", Sentiment::Positive}, {"rq7", Sentiment::Negative}}};
  for (const auto& [rq, cls] : clouds) {
    if (!have_docs) {
      sum[rq] = skipped("review");
      continue;
    }
    const std::string file = std::string(rq) + (cls == Sentiment::Positive ? "_positive_words.csv" : "_negative_words.csv");
    std::string csv = csv::format_row({"source", "word", "count"});
    auto entry = nlohmann::ordered_json{{"status", "ok"}, {"file", file}, {"top", nlohmann::ordered_json::object()}};
    for (auto source : {DocumentSource::GoogleTrain, DocumentSource::SarTest}) {
      std::vector<LabeledDocument> part;
      for (const auto& d : docs)
        if (d.source == source) part.push_back(d);
      if (part.empty()) continue;
      const auto table = word_frequencies(part, cls, in.top_k);
      for (const auto& [w, c] : table) csv += csv::format_row({std::string(to_string(source)), w, std::to_string(c)});
      auto top = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < table.size() && i < 10; ++i) top.push_back(table[i].first);
      entry["top"][std::string(to_string(source))] = top;
    }
    b.files[file] = csv;
    sum[rq] = entry;
  }

  if (have_apps) {
    const auto m = correlation_matrix(*in.apps);
    std::vector<std::string> header{"variable"};
    for (auto v : kCorrelationVariables) header.emplace_back(v);
    std::string csv = csv::format_row(header);
    for (std::size_t i = 0; i < 5; ++i) {
      std::vector<std::string> row{std::string(kCorrelationVariables[i])};
      for (std::size_t j = 0; j < 5; ++j) row.push_back(opt(m.values[i][j]));
      csv += csv::format_row(row);
    }
    b.files["rq8_correlation.csv"] = csv;
    auto matrix = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) matrix[std::string(kCorrelationVariables[i])][std::string(kCorrelationVariables[j])] = opt_json(m.values[i][j]);
    }
    sum["rq8"] = {{"status", "ok"},
                  {"source", "google_apps"},
                  {"file", "rq8_correlation.csv"},
                  {"records", m.records},
                  {"size_excluded", m.size_excluded},
                  {"rating_excluded", m.rating_excluded},
                  {"matrix", matrix}};
  } else {
    sum["rq8"] = skipped("apps");
  }

  // Keep rq keys in order regardless of the order they were filled.
  nlohmann::ordered_json ordered;
  for (const char* k : {"rq1", "rq2", "rq3", "rq4", "rq5", "rq6", "rq7", "rq8"}) ordered[k] = sum[k];
  b.summary = ordered;
  return b;
}

}  // namespace sentilab::eda
