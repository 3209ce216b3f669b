#pragma once
// Parsing, labeling and cleaning of the three CSV inputs:
//   apps metadata   App,Category,Rating,Reviews,Size,Installs,Type,Price,
//                   Content Rating,Genres,Last Updated,Current Ver,Android Ver
//   user reviews    App,Translated_Review,Sentiment,Sentiment_Polarity,
//                   Sentiment_Subjectivity
//   student survey  department,app,review,rating,type,category (6 columns)
//
// Every parser returns its records together with a ParseReport; a row is
// either a record or a counted diagnostic, so
//   records.size() + report.rows_dropped == report.rows_read.
// Structural problems (no header, missing columns) throw InputError.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentilab/sentiment.hpp"
#include "sentilab/textprep.hpp"
#include "sentilab/util/csv.hpp"
#include "sentilab/util/error.hpp"
#include "sentilab/util/io.hpp"

namespace sentilab {

enum class AppType { Free, Paid };

constexpr std::string_view to_string(AppType t) noexcept { return t == AppType::Free ? "Free" : "Paid"; }

struct Date {
  int year = 0;
  int month = 0;  // 1..12
  int day = 0;

  friend bool operator==(const Date&, const Date&) = default;
};

struct AppRecord {
  std::string name;
  std::string category;
  std::optional<double> rating;  // [1, 5]
  std::uint64_t reviews_count = 0;
  std::optional<std::uint64_t> size_bytes;  // absent for "Varies with device"
  std::uint64_t installs_lower_bound = 0;
  AppType app_type = AppType::Free;
  double price_usd = 0.0;
  std::string content_rating;
  std::vector<std::string> genres;
  Date last_updated;
  std::string current_version;  // empty when the source cell is null
  std::string android_version;  // empty when the source cell is null

  friend bool operator==(const AppRecord&, const AppRecord&) = default;
};

struct ReviewRecord {
  std::string app_name;
  std::string review_text;
  std::optional<Sentiment> provided_sentiment;
  std::optional<double> provided_polarity;
  std::optional<double> provided_subjectivity;
};

struct SarRecord {
  std::string department;
  std::string app_name;
  std::string review_text;
  int rating = 0;
  AppType app_type = AppType::Free;
  std::string category;
};

enum class DocumentSource { GoogleTrain, SarTest };

constexpr std::string_view to_string(DocumentSource s) noexcept {
  return s == DocumentSource::GoogleTrain ? "GoogleTrain" : "SarTest";
}

struct LabeledDocument {
  std::string text;
  Sentiment label = Sentiment::Positive;
  DocumentSource source = DocumentSource::GoogleTrain;

  friend bool operator==(const LabeledDocument&, const LabeledDocument&) = default;
};

struct RowDiagnostic {
  std::size_t line = 0;
  std::string reason;
  std::string detail;
};

struct ParseReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::map<std::string, std::size_t> reasons;  // reason -> count (drops and kept-with-warning rows)
  std::vector<RowDiagnostic> diagnostics;

  void note(std::size_t line, std::string reason, std::string detail = {}) {
    ++reasons[reason];
    diagnostics.push_back({line, std::move(reason), std::move(detail)});
  }
  void drop(std::size_t line, std::string reason, std::string detail = {}) {
    ++rows_dropped;
    note(line, std::move(reason), std::move(detail));
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["rows_read"] = rows_read;
    j["rows_dropped"] = rows_dropped;
    j["reasons"] = nlohmann::ordered_json::object();
    for (const auto& [reason, count] : reasons) j["reasons"][reason] = count;
    return j;
  }
};

template <class Record>
struct ParseResult {
  std::vector<Record> records;
  ParseReport report;
};

namespace corpus_detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

// "NaN", "nan" and "" all mean "no value".
inline bool is_null(std::string_view cell) {
  cell = trim(cell);
  return cell.empty() || cell == "NaN" || cell == "nan";
}

struct Header {
  std::vector<std::string> names;

  std::optional<std::size_t> find(std::string_view name) const {
    const std::string want = lower(name);
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (lower(trim(names[i])) == want) return i;
    }
    return std::nullopt;
  }

  std::size_t require(std::string_view name, std::string_view file) const {
    auto idx = find(name);
    if (!idx) throw InputError(std::string(file) + ": header lacks column '" + std::string(name) + "'");
    return *idx;
  }
};

inline std::vector<csv::Row> rows_with_header(std::string_view raw, std::string_view file, Header& header) {
  auto rows = csv::parse(raw);
  // Lines starting with '#' before the header carry provenance (manifest digests).
  std::size_t first = 0;
  while (first < rows.size() && !rows[first].fields.empty() && !rows[first].fields[0].empty() &&
         rows[first].fields[0].front() == '#') {
    ++first;
  }
  if (first >= rows.size()) throw InputError(std::string(file) + ": missing header row");
  header.names = rows[first].fields;
  rows.erase(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(first) + 1);
  return rows;
}

// "19M" -> 19 * 2^20, "201k" -> 201 * 2^10, "123" -> 123 bytes.
inline std::optional<std::uint64_t> parse_size(std::string_view cell, bool& varies) {
  cell = trim(cell);
  varies = cell == "Varies with device";
  if (varies || cell.empty()) return std::nullopt;
  double scale = 1.0;
  const char suffix = cell.back();
  if (suffix == 'M' || suffix == 'm') {
    scale = 1024.0 * 1024.0;
    cell.remove_suffix(1);
  } else if (suffix == 'k' || suffix == 'K') {
    scale = 1024.0;
    cell.remove_suffix(1);
  }
  std::string digits;
  for (char c : cell) {
    if (c != ',') digits.push_back(c);
  }
  double value = 0;
  if (!parse_double(digits, value) || value < 0 || !std::isfinite(value)) return std::nullopt;
  return static_cast<std::uint64_t>(std::llround(value * scale));
}

// "10,000+" -> 10000.
inline std::optional<std::uint64_t> parse_installs(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.back() == '+') cell.remove_suffix(1);
  std::string digits;
  for (char c : cell) {
    if (c != ',') digits.push_back(c);
  }
  std::uint64_t v = 0;
  if (!parse_int(digits, v)) return std::nullopt;
  return v;
}

inline std::optional<double> parse_price(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '$') cell.remove_prefix(1);
  double v = 0;
  if (!parse_double(cell, v) || v < 0 || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline constexpr std::array<std::string_view, 12> kMonths{"January", "February", "March",     "April",
                                                          "May",     "June",     "July",      "August",
                                                          "September", "October", "November", "December"};

// "January 7, 2018"
inline std::optional<Date> parse_date(std::string_view cell) {
  cell = trim(cell);
  const auto space = cell.find(' ');
  const auto comma = cell.find(',');
  if (space == std::string_view::npos || comma == std::string_view::npos || comma < space) return std::nullopt;
  Date d;
  const auto month_name = cell.substr(0, space);
  for (std::size_t m = 0; m < kMonths.size(); ++m) {
    if (kMonths[m] == month_name) d.month = static_cast<int>(m) + 1;
  }
  if (d.month == 0) return std::nullopt;
  if (!parse_int(trim(cell.substr(space + 1, comma - space - 1)), d.day)) return std::nullopt;
  if (!parse_int(trim(cell.substr(comma + 1)), d.year)) return std::nullopt;
  if (d.day < 1 || d.day > 31) return std::nullopt;
  return d;
}

inline std::string format_date(const Date& d) {
  return std::string(kMonths.at(static_cast<std::size_t>(d.month - 1))) + " " + std::to_string(d.day) + ", " +
         std::to_string(d.year);
}

inline std::vector<std::string> split_genres(std::string_view cell) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= cell.size()) {
    auto end = cell.find(';', start);
    if (end == std::string_view::npos) end = cell.size();
    auto piece = trim(cell.substr(start, end - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = end + 1;
  }
  return out;
}

inline std::optional<AppType> parse_app_type(std::string_view cell) {
  cell = trim(cell);
  if (cell == "Free" || cell == "free") return AppType::Free;
  if (cell == "Paid" || cell == "paid") return AppType::Paid;
  return std::nullopt;
}

}  // namespace corpus_detail

inline ParseResult<AppRecord> parse_apps_csv(std::string_view raw) {
  using namespace corpus_detail;
  Header header;
  auto rows = rows_with_header(raw, "apps csv", header);
  const std::size_t c_name = header.require("App", "apps csv");
  const std::size_t c_category = header.require("Category", "apps csv");
  const std::size_t c_rating = header.require("Rating", "apps csv");
  const std::size_t c_reviews = header.require("Reviews", "apps csv");
  const std::size_t c_size = header.require("Size", "apps csv");
  const std::size_t c_installs = header.require("Installs", "apps csv");
  const std::size_t c_type = header.require("Type", "apps csv");
  const std::size_t c_price = header.require("Price", "apps csv");
  const std::size_t c_content = header.require("Content Rating", "apps csv");
  const std::size_t c_genres = header.require("Genres", "apps csv");
  const std::size_t c_updated = header.require("Last Updated", "apps csv");
  const std::size_t c_current = header.require("Current Ver", "apps csv");
  const std::size_t c_android = header.require("Android Ver", "apps csv");

  ParseResult<AppRecord> result;
  for (const auto& row : rows) {
    ++result.report.rows_read;
    const auto& f = row.fields;
    if (f.size() != header.names.size()) {
      result.report.drop(row.line, "field_count",
                         std::to_string(f.size()) + " fields, expected " + std::to_string(header.names.size()));
      continue;
    }
    AppRecord rec;
    rec.name = std::string(trim(f[c_name]));
    rec.category = std::string(trim(f[c_category]));
    if (rec.name.empty()) {
      result.report.drop(row.line, "missing_name");
      continue;
    }
    if (!is_null(f[c_rating])) {
      double r = 0;
      if (!parse_double(trim(f[c_rating]), r)) {
        result.report.drop(row.line, "bad_rating", f[c_rating]);
        continue;
      }
      if (!(r >= 1.0 && r <= 5.0)) {
        result.report.drop(row.line, "rating_out_of_range", f[c_rating]);
        continue;
      }
      rec.rating = r;
    }
    if (!parse_int(trim(f[c_reviews]), rec.reviews_count)) {
      result.report.drop(row.line, "bad_reviews_count", f[c_reviews]);
      continue;
    }
    bool varies = false;
    rec.size_bytes = parse_size(f[c_size], varies);
    if (!rec.size_bytes && !varies) {
      result.report.drop(row.line, "bad_size", f[c_size]);
      continue;
    }
    auto installs = parse_installs(f[c_installs]);
    if (!installs) {
      result.report.drop(row.line, "bad_installs", f[c_installs]);
      continue;
    }
    rec.installs_lower_bound = *installs;
    auto price = parse_price(f[c_price]);
    if (!price) {
      result.report.drop(row.line, "bad_price", f[c_price]);
      continue;
    }
    rec.price_usd = *price;
    if (is_null(f[c_type])) {
      // A null type is recovered from the price.
      rec.app_type = rec.price_usd == 0.0 ? AppType::Free : AppType::Paid;
      result.report.note(row.line, "type_inferred_from_price");
    } else {
      auto type = parse_app_type(f[c_type]);
      if (!type) {
        result.report.drop(row.line, "bad_type", f[c_type]);
        continue;
      }
      rec.app_type = *type;
    }
    if ((rec.app_type == AppType::Free) != (rec.price_usd == 0.0)) {
      result.report.drop(row.line, "type_price_mismatch", f[c_type] + "/" + f[c_price]);
      continue;
    }
    rec.content_rating = is_null(f[c_content]) ? std::string() : std::string(trim(f[c_content]));
    rec.genres = split_genres(f[c_genres]);
    auto date = parse_date(f[c_updated]);
    if (!date) {
      result.report.drop(row.line, "bad_date", f[c_updated]);
      continue;
    }
    rec.last_updated = *date;
    rec.current_version = is_null(f[c_current]) ? std::string() : std::string(trim(f[c_current]));
    rec.android_version = is_null(f[c_android]) ? std::string() : std::string(trim(f[c_android]));
    result.records.push_back(std::move(rec));
  }
  return result;
}

// Canonical CSV form of app records; parse_apps_csv reads it back to equal records.
inline std::string write_apps_csv(const std::vector<AppRecord>& apps) {
  std::string out = csv::format_row({"App", "Category", "Rating", "Reviews", "Size", "Installs", "Type", "Price",
                                     "Content Rating", "Genres", "Last Updated", "Current Ver", "Android Ver"});
  for (const auto& a : apps) {
    std::string genres;
    for (std::size_t i = 0; i < a.genres.size(); ++i) {
      if (i) genres.push_back(';');
      genres += a.genres[i];
    }
    out += csv::format_row({a.name, a.category, a.rating ? format_double(*a.rating) : "NaN",
                            std::to_string(a.reviews_count),
                            a.size_bytes ? std::to_string(*a.size_bytes) : "Varies with device",
                            std::to_string(a.installs_lower_bound) + "+", std::string(to_string(a.app_type)),
                            a.price_usd == 0.0 ? "0" : "$" + format_double(a.price_usd),
                            a.content_rating.empty() ? "NaN" : a.content_rating, genres,
                            corpus_detail::format_date(a.last_updated),
                            a.current_version.empty() ? "NaN" : a.current_version,
                            a.android_version.empty() ? "NaN" : a.android_version});
  }
  return out;
}

inline ParseResult<ReviewRecord> parse_reviews_csv(std::string_view raw) {
  using namespace corpus_detail;
  Header header;
  auto rows = rows_with_header(raw, "reviews csv", header);
  const std::size_t c_app = header.require("App", "reviews csv");
  const std::size_t c_text = header.require("Translated_Review", "reviews csv");
  const auto c_sentiment = header.find("Sentiment");
  const auto c_polarity = header.find("Sentiment_Polarity");
  const auto c_subjectivity = header.find("Sentiment_Subjectivity");

  auto cell = [](const std::vector<std::string>& f, std::optional<std::size_t> c) -> std::string_view {
    if (!c || *c >= f.size()) return {};
    return f[*c];
  };

  ParseResult<ReviewRecord> result;
  for (const auto& row : rows) {
    ++result.report.rows_read;
    const auto& f = row.fields;
    if (f.size() != header.names.size()) {
      result.report.drop(row.line, "field_count");
      continue;
    }
    if (is_null(f[c_text])) {
      result.report.drop(row.line, "empty_review");
      continue;
    }
    ReviewRecord rec;
    rec.app_name = std::string(trim(f[c_app]));
    rec.review_text = f[c_text];

    bool consistent = true;
    const auto s_cell = cell(f, c_sentiment);
    if (!is_null(s_cell)) {
      rec.provided_sentiment = parse_sentiment(trim(s_cell));
      if (!rec.provided_sentiment) consistent = false;
    }
    const auto p_cell = cell(f, c_polarity);
    const auto q_cell = cell(f, c_subjectivity);
    if (!is_null(p_cell)) {
      double v = 0;
      if (parse_double(trim(p_cell), v) && v >= -1.0 && v <= 1.0) rec.provided_polarity = v;
      else consistent = false;
    }
    if (!is_null(q_cell)) {
      double v = 0;
      if (parse_double(trim(q_cell), v) && v >= 0.0 && v <= 1.0) rec.provided_subjectivity = v;
      else consistent = false;
    }
    const bool any = rec.provided_sentiment || rec.provided_polarity || rec.provided_subjectivity;
    const bool all = rec.provided_sentiment && rec.provided_polarity && rec.provided_subjectivity;
    const bool scores_only_pair = !rec.provided_sentiment && rec.provided_polarity && rec.provided_subjectivity;
    if (!consistent || (any && !all && !scores_only_pair)) {
      rec.provided_sentiment.reset();
      rec.provided_polarity.reset();
      rec.provided_subjectivity.reset();
      result.report.note(row.line, "inconsistent_sentiment_fields");
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

inline ParseResult<SarRecord> parse_sar_csv(std::string_view raw) {
  using namespace corpus_detail;
  Header header;
  auto rows = rows_with_header(raw, "survey csv", header);
  if (header.names.size() != 6) {
    throw InputError("survey csv: expected 6 columns, header has " + std::to_string(header.names.size()));
  }
  ParseResult<SarRecord> result;
  for (const auto& row : rows) {
    ++result.report.rows_read;
    const auto& f = row.fields;
    if (f.size() != 6) {
      result.report.drop(row.line, "field_count");
      continue;
    }
    SarRecord rec;
    rec.department = std::string(trim(f[0]));
    rec.app_name = std::string(trim(f[1]));
    rec.review_text = f[2];
    if (!parse_int(trim(f[3]), rec.rating)) {
      result.report.drop(row.line, "bad_rating", f[3]);
      continue;
    }
    if (rec.rating < 1 || rec.rating > 5) {
      result.report.drop(row.line, "rating_out_of_range", f[3]);
      continue;
    }
    auto type = parse_app_type(f[4]);
    if (!type) {
      result.report.drop(row.line, "bad_type", f[4]);
      continue;
    }
    rec.app_type = *type;
    rec.category = std::string(trim(f[5]));
    if (is_null(rec.review_text)) {
      result.report.drop(row.line, "empty_review");
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

// Ratings below 3 are negative; 3 and above are positive.
constexpr Sentiment label_from_rating(int rating) {
  if (rating < 1 || rating > 5) throw PreconditionError("rating must be in 1..5");
  return rating < 3 ? Sentiment::Negative : Sentiment::Positive;
}

// Fallback labeler for reviews without a provided sentiment (e.g. lexicon orientation).
using TextLabeler = std::function<std::optional<Sentiment>(std::string_view)>;

struct LabelingReport {
  std::size_t from_provided = 0;
  std::size_t from_fallback = 0;
  std::size_t unlabeled = 0;
};

inline std::vector<LabeledDocument> documents_from_reviews(const std::vector<ReviewRecord>& reviews,
                                                           const TextLabeler& fallback = {},
                                                           LabelingReport* report = nullptr) {
  std::vector<LabeledDocument> docs;
  LabelingReport local;
  for (const auto& r : reviews) {
    std::optional<Sentiment> label = r.provided_sentiment;
    if (label) {
      ++local.from_provided;
    } else if (fallback) {
      label = fallback(r.review_text);
      if (label) ++local.from_fallback;
    }
    if (!label) {
      ++local.unlabeled;
      continue;
    }
    docs.push_back({r.review_text, *label, DocumentSource::GoogleTrain});
  }
  if (report) *report = local;
  return docs;
}

inline std::vector<LabeledDocument> documents_from_sar(const std::vector<SarRecord>& survey) {
  std::vector<LabeledDocument> docs;
  docs.reserve(survey.size());
  for (const auto& s : survey) docs.push_back({s.review_text, label_from_rating(s.rating), DocumentSource::SarTest});
  return docs;
}

struct CleaningReport {
  std::size_t before = 0;
  std::size_t after = 0;
  std::size_t removed_empty = 0;
  std::size_t removed_duplicate = 0;

  nlohmann::ordered_json to_json() const {
    return {{"before", before}, {"after", after}, {"removed_empty", removed_empty},
            {"removed_duplicate", removed_duplicate}};
  }
};

// Drops documents whose normalized text is empty and exact (text, label)
// duplicates, keeping the first occurrence. Order is otherwise preserved.
inline std::vector<LabeledDocument> clean_corpus(const std::vector<LabeledDocument>& docs,
                                                 CleaningReport* report = nullptr) {
  CleaningReport local;
  local.before = docs.size();
  std::vector<LabeledDocument> out;
  std::set<std::pair<std::string_view, Sentiment>> seen;
  for (const auto& d : docs) {
    if (normalize(d.text).empty()) {
      ++local.removed_empty;
      continue;
    }
    if (!seen.emplace(d.text, d.label).second) {
      ++local.removed_duplicate;
      continue;
    }
    out.push_back(d);
  }
  local.after = out.size();
  if (report) *report = local;
  return out;
}

// Corpus store written by `ingest`: a JSON document with the manifest digest
// and the documents in order.
inline nlohmann::ordered_json documents_to_json(const std::vector<LabeledDocument>& docs) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& d : docs) {
    arr.push_back({{"text", d.text}, {"label", std::string(to_string(d.label))}, {"source", std::string(to_string(d.source))}});
  }
  return arr;
}

inline std::vector<LabeledDocument> documents_from_json(const nlohmann::json& arr) {
  std::vector<LabeledDocument> docs;
  for (const auto& j : arr) {
    LabeledDocument d;
    d.text = j.at("text").get<std::string>();
    auto label = parse_sentiment(j.at("label").get<std::string>());
    if (!label) throw InputError("corpus store: bad label");
    d.label = *label;
    d.source = j.at("source").get<std::string>() == "SarTest" ? DocumentSource::SarTest : DocumentSource::GoogleTrain;
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace sentilab
