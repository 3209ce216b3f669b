#pragma once
// k-nearest neighbours under cosine similarity.
//
// Neighbours are ranked by similarity, ties by lower stored index; zero-norm
// vectors have similarity 0 with everything. Similarities are accumulated
// through an inverted index, so only stored vectors sharing a term with the
// query are touched; every untouched vector has similarity exactly 0.

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sentilab/classifiers/dataset.hpp"
#include "sentilab/util/error.hpp"

namespace sentilab {

class KnnModel {
 public:
  KnnModel() = default;

  KnnModel(std::vector<Example> stored, std::size_t k) : stored_(std::move(stored)), k_(k) {
    if (stored_.empty()) throw PreconditionError("knn: no stored vectors");
    if (k_ == 0) throw PreconditionError("knn: k must be positive");
    build_index();
  }

  std::size_t k() const noexcept { return k_; }
  const std::vector<Example>& stored() const noexcept { return stored_; }

  // Effective k is min(k, number of stored vectors).
  Sentiment predict(const DocumentVector& query) const {
    const std::size_t k = std::min(k_, stored_.size());
    std::vector<std::pair<double, std::uint32_t>> positive;  // (similarity, index) with similarity > 0
    if (query.l2_norm > 0.0) {
      std::vector<double> acc(stored_.size(), 0.0);
      std::vector<std::uint32_t> touched;
      for (const auto& q : query.entries) {
        if (q.index >= postings_.size()) continue;
        for (const auto& [doc, w] : postings_[q.index]) {
          if (acc[doc] == 0.0) touched.push_back(doc);
          acc[doc] += q.weight * w;
        }
      }
      for (auto doc : touched) {
        const double sim = acc[doc] / (query.l2_norm * stored_[doc].x.l2_norm);
        if (sim > 0.0) positive.emplace_back(sim, doc);
      }
      std::sort(positive.begin(), positive.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });
    }
    std::array<std::size_t, 3> votes{};
    std::size_t taken = 0;
    for (; taken < k && taken < positive.size(); ++taken) ++votes[index_of(stored_[positive[taken].second].y)];
    if (taken < k) {
      // Fill with the lowest-index vectors at similarity 0.
      std::vector<bool> used(stored_.size(), false);
      for (const auto& p : positive) used[p.second] = true;
      for (std::uint32_t i = 0; i < stored_.size() && taken < k; ++i) {
        if (used[i]) continue;
        ++votes[index_of(stored_[i].y)];
        ++taken;
      }
    }
    return majority(votes);
  }

 private:
  void build_index() {
    std::uint32_t max_index = 0;
    for (const auto& ex : stored_)
      for (const auto& e : ex.x.entries) max_index = std::max(max_index, e.index + 1);
    postings_.assign(max_index, {});
    for (std::uint32_t d = 0; d < stored_.size(); ++d) {
      if (stored_[d].x.l2_norm == 0.0) continue;
      for (const auto& e : stored_[d].x.entries) {
        if (e.weight != 0.0) postings_[e.index].emplace_back(d, e.weight);
      }
    }
  }

  std::vector<Example> stored_;
  std::size_t k_ = 5;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> postings_;
};

inline KnnModel train_knn(const SampleView& data, std::size_t k) {
  std::vector<Example> stored;
  stored.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) stored.push_back(data[i]);
  return KnnModel(std::move(stored), k);
}

inline Sentiment predict_knn(const KnnModel& m, const DocumentVector& v) { return m.predict(v); }

}  // namespace sentilab
