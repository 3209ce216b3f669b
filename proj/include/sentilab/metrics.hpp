#pragma once
// Confusion matrices and the evaluation formulas built on them.
//
// Rows are actual classes, columns predicted. The class set is always
// {Positive, Negative}, plus Neutral whenever it occurs in either sequence.
// Precision/recall with a zero denominator are 0, and F is 0 when
// precision + recall is 0.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sentilab/sentiment.hpp"
#include "sentilab/util/csv.hpp"
#include "sentilab/util/error.hpp"
#include "sentilab/util/io.hpp"

namespace sentilab {

struct ConfusionMatrix {
  std::vector<Sentiment> classes;
  std::vector<std::vector<std::size_t>> counts;  // counts[actual][predicted]

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& row : counts)
      for (auto c : row) t += c;
    return t;
  }

  std::size_t trace() const {
    std::size_t t = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
    return t;
  }

  std::size_t position(Sentiment s) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i] == s) return i;
    throw PreconditionError("class not in confusion matrix");
  }

  std::size_t at(Sentiment actual, Sentiment predicted) const { return counts[position(actual)][position(predicted)]; }
};

inline ConfusionMatrix confusion(std::span<const Sentiment> actual, std::span<const Sentiment> predicted) {
  if (actual.size() != predicted.size()) throw PreconditionError("confusion: length mismatch");
  if (actual.empty()) throw PreconditionError("confusion: empty input");
  bool neutral = false;
  for (auto s : actual) neutral |= s == Sentiment::Neutral;
  for (auto s : predicted) neutral |= s == Sentiment::Neutral;
  ConfusionMatrix cm;
  cm.classes = {Sentiment::Positive, Sentiment::Negative};
  if (neutral) cm.classes.push_back(Sentiment::Neutral);
  cm.counts.assign(cm.classes.size(), std::vector<std::size_t>(cm.classes.size(), 0));
  for (std::size_t t = 0; t < actual.size(); ++t) ++cm.counts[cm.position(actual[t])][cm.position(predicted[t])];
  return cm;
}

inline double accuracy(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw PreconditionError("accuracy: empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

// (TP + TN) / (TP + TN + FP + FN)
inline double binary_accuracy(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
  const std::size_t total = tp + tn + fp + fn;
  if (total == 0) throw PreconditionError("accuracy: no outcomes");
  return static_cast<double>(tp + tn) / static_cast<double>(total);
}

inline double f_measure(double precision, double recall) {
  const double denom = precision + recall;
  return denom == 0.0 ? 0.0 : 2.0 * precision * recall / denom;
}

struct ClassScores {
  Sentiment cls = Sentiment::Positive;
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

struct EvaluationReport {
  std::string config_tag;
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  std::vector<ClassScores> per_class;
  double macro_f = 0.0;
  double positive_f = 0.0;

  const ClassScores& scores(Sentiment s) const {
    for (const auto& c : per_class)
      if (c.cls == s) return c;
    throw PreconditionError("class not in report");
  }
};

inline EvaluationReport evaluate(std::span<const Sentiment> actual, std::span<const Sentiment> predicted,
                                 std::string config_tag = {}) {
  EvaluationReport r;
  r.config_tag = std::move(config_tag);
  r.confusion = confusion(actual, predicted);
  r.accuracy = accuracy(r.confusion);
  const auto& cm = r.confusion;
  const std::size_t n = cm.classes.size();
  double f_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t row_sum = 0, col_sum = 0;
    for (std::size_t j = 0; j < n; ++j) {
      row_sum += cm.counts[k][j];
      col_sum += cm.counts[j][k];
    }
    const double tp = static_cast<double>(cm.counts[k][k]);
    ClassScores s;
    s.cls = cm.classes[k];
    s.precision = col_sum == 0 ? 0.0 : tp / static_cast<double>(col_sum);
    s.recall = row_sum == 0 ? 0.0 : tp / static_cast<double>(row_sum);
    s.f = f_measure(s.precision, s.recall);
    f_sum += s.f;
    if (s.cls == Sentiment::Positive) r.positive_f = s.f;
    r.per_class.push_back(s);
  }
  r.macro_f = f_sum / static_cast<double>(n);
  return r;
}

// CSV layout: config_tag, accuracy, positive_f, macro_f, then
// precision/recall/f for Positive, Negative, Neutral (empty when absent).
inline std::vector<std::string> report_csv_header() {
  return {"config_tag", "accuracy", "positive_f", "macro_f",
          "positive_precision", "positive_recall", "positive_f1",
          "negative_precision", "negative_recall", "negative_f1",
          "neutral_precision", "neutral_recall", "neutral_f1"};
}

inline std::vector<std::string> report_csv_fields(const EvaluationReport& r) {
  std::vector<std::string> row{r.config_tag, format_fixed(r.accuracy, 6), format_fixed(r.positive_f, 6),
                               format_fixed(r.macro_f, 6)};
  for (auto cls : kAllSentiments) {
    bool found = false;
    for (const auto& s : r.per_class) {
      if (s.cls != cls) continue;
      found = true;
      row.push_back(format_fixed(s.precision, 6));
      row.push_back(format_fixed(s.recall, 6));
      row.push_back(format_fixed(s.f, 6));
    }
    if (!found) row.insert(row.end(), 3, std::string());
  }
  return row;
}

inline std::string report_csv_row(const EvaluationReport& r) { return csv::format_row(report_csv_fields(r)); }

}  // namespace sentilab
