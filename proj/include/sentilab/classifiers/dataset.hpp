#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sentilab/features.hpp"
#include "sentilab/sentiment.hpp"
#include "sentilab/util/rng.hpp"

namespace sentilab {

struct Example {
  DocumentVector x;
  Sentiment y = Sentiment::Positive;
};

// Rows of a dataset selected by index; a bootstrap resample is a view with
// repeated indices, so training never copies feature vectors.
class SampleView {
 public:
  SampleView() = default;

  explicit SampleView(std::span<const Example> data) : data_(data), rows_(data.size()) {
    for (std::size_t i = 0; i < rows_.size(); ++i) rows_[i] = static_cast<std::uint32_t>(i);
  }

  SampleView(std::span<const Example> data, std::vector<std::uint32_t> rows) : data_(data), rows_(std::move(rows)) {}

  // |data| draws with replacement.
  static SampleView bootstrap(const SampleView& base, Rng& rng) {
    std::vector<std::uint32_t> rows(base.size());
    for (auto& r : rows) r = base.rows_[rng.below(base.size())];
    return SampleView(base.data_, std::move(rows));
  }

  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const Example& operator[](std::size_t i) const { return data_[rows_[i]]; }
  std::span<const std::uint32_t> rows() const noexcept { return rows_; }
  std::span<const Example> data() const noexcept { return data_; }

  std::array<std::size_t, 3> class_counts() const {
    std::array<std::size_t, 3> counts{};
    for (auto r : rows_) ++counts[index_of(data_[r].y)];
    return counts;
  }

 private:
  std::span<const Example> data_;
  std::vector<std::uint32_t> rows_;
};

// Largest count wins; ties go to the earlier class in enum order.
inline Sentiment majority(const std::array<std::size_t, 3>& votes) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < votes.size(); ++k)
    if (votes[k] > votes[best]) best = k;
  return kAllSentiments[best];
}

}  // namespace sentilab
