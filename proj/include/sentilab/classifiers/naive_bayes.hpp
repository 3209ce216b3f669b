#pragma once
// Multinomial naive Bayes with additive (Laplace) smoothing:
//   P(w | c) = (count(w, c) + alpha) / (total(c) + alpha * V)
// Counts are the document-vector weights, so TF vectors give the classic
// multinomial model. Classes without documents are left out of the model.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "sentilab/classifiers/dataset.hpp"
#include "sentilab/util/error.hpp"

namespace sentilab {

struct NaiveBayesModel {
  std::vector<Sentiment> classes;                        // present classes, enum order
  std::vector<double> class_log_priors;                  // parallel to classes
  std::vector<std::vector<double>> term_log_likelihoods; // [class][term]
  double smoothing_alpha = 1.0;
  std::size_t vocab_size = 0;
};

struct NaiveBayesPrediction {
  Sentiment label = Sentiment::Positive;
  std::vector<double> log_scores;  // parallel to model.classes
};

inline NaiveBayesModel train_nb(const SampleView& data, std::size_t vocab_size, double alpha = 1.0) {
  if (data.empty()) throw PreconditionError("train_nb: empty data");
  if (!(alpha > 0.0)) throw PreconditionError("train_nb: alpha must be positive");
  const auto docs = data.class_counts();
  std::array<std::vector<double>, 3> counts;
  std::array<double, 3> totals{};
  for (std::size_t c = 0; c < 3; ++c)
    if (docs[c] > 0) counts[c].assign(vocab_size, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& ex = data[i];
    const std::size_t c = index_of(ex.y);
    for (const auto& e : ex.x.entries) {
      if (e.index >= vocab_size) throw PreconditionError("train_nb: term index beyond vocabulary");
      counts[c][e.index] += e.weight;
      totals[c] += e.weight;
    }
  }
  NaiveBayesModel m;
  m.smoothing_alpha = alpha;
  m.vocab_size = vocab_size;
  const double n = static_cast<double>(data.size());
  for (std::size_t c = 0; c < 3; ++c) {
    if (docs[c] == 0) continue;
    m.classes.push_back(kAllSentiments[c]);
    m.class_log_priors.push_back(std::log(static_cast<double>(docs[c]) / n));
    const double denom = std::log(totals[c] + alpha * static_cast<double>(vocab_size));
    std::vector<double> ll(vocab_size);
    for (std::size_t w = 0; w < vocab_size; ++w) ll[w] = std::log(counts[c][w] + alpha) - denom;
    m.term_log_likelihoods.push_back(std::move(ll));
  }
  return m;
}

inline NaiveBayesModel train_nb(std::span<const Example> data, std::size_t vocab_size, double alpha = 1.0) {
  return train_nb(SampleView(data), vocab_size, alpha);
}

// argmax over classes of log prior + sum_w weight(w) * log P(w | c).
inline NaiveBayesPrediction predict_nb(const NaiveBayesModel& m, const DocumentVector& v) {
  NaiveBayesPrediction p;
  p.log_scores.resize(m.classes.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m.classes.size(); ++k) {
    double s = m.class_log_priors[k];
    for (const auto& e : v.entries) {
      if (e.index >= m.vocab_size) throw PreconditionError("predict_nb: term index beyond vocabulary");
      s += e.weight * m.term_log_likelihoods[k][e.index];
    }
    p.log_scores[k] = s;
    if (s > best) {  // strict: earlier class wins ties
      best = s;
      p.label = m.classes[k];
    }
  }
  return p;
}

}  // namespace sentilab
