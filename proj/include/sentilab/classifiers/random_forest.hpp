#pragma once
// Random forest of Gini decision trees over sparse document vectors.
//
// Each tree sees a bootstrap resample (optional) and, at every node, a random
// subset of `feature_subsample` features drawn from the features that occur
// in the node's documents. A split sends x[f] > threshold right; thresholds
// are midpoints between consecutive distinct values (absent features count as
// 0). Leaves predict the node majority; the forest predicts the majority vote.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "sentilab/classifiers/dataset.hpp"
#include "sentilab/util/error.hpp"
#include "sentilab/util/rng.hpp"

namespace sentilab {

using ClassCounts = std::array<std::size_t, 3>;

inline double gini(const ClassCounts& counts) {
  const std::size_t n = counts[0] + counts[1] + counts[2];
  if (n == 0) return 0.0;
  double g = 1.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(n);
    g -= p * p;
  }
  return g;
}

// Size-weighted Gini of a two-way partition.
inline double split_gini(const ClassCounts& left, const ClassCounts& right) {
  const double nl = static_cast<double>(left[0] + left[1] + left[2]);
  const double nr = static_cast<double>(right[0] + right[1] + right[2]);
  if (nl + nr == 0.0) return 0.0;
  return (nl * gini(left) + nr * gini(right)) / (nl + nr);
}

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  Sentiment label = Sentiment::Positive;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  Sentiment predict(const DocumentVector& v) const {
    std::size_t at = 0;
    while (nodes[at].feature >= 0) {
      const auto f = static_cast<std::uint32_t>(nodes[at].feature);
      double value = 0.0;
      auto it = std::lower_bound(v.entries.begin(), v.entries.end(), f,
                                 [](const SparseEntry& e, std::uint32_t idx) { return e.index < idx; });
      if (it != v.entries.end() && it->index == f) value = it->weight;
      at = static_cast<std::size_t>(value > nodes[at].threshold ? nodes[at].right : nodes[at].left);
    }
    return nodes[at].label;
  }
};

struct RandomForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 32;
  std::size_t feature_subsample = 0;  // 0 = ceil(sqrt(V))
  bool bootstrap = true;
  std::size_t min_samples_split = 2;
  std::uint64_t seed = 0;
};

struct RandomForestModel {
  std::vector<DecisionTree> trees;
  std::size_t feature_subsample = 0;
  std::uint64_t seed = 0;

  Sentiment predict(const DocumentVector& v) const {
    ClassCounts votes{};
    for (const auto& t : trees) ++votes[index_of(t.predict(v))];
    return majority(votes);
  }
};

namespace forest_detail {

class TreeBuilder {
 public:
  TreeBuilder(const SampleView& data, std::size_t dimension, const RandomForestParams& p, std::size_t subsample, Rng& rng)
      : data_(data), p_(p), subsample_(subsample), rng_(rng), slot_(dimension, -1) {}

  DecisionTree build() {
    std::vector<std::uint32_t> rows(data_.size());
    std::iota(rows.begin(), rows.end(), 0u);
    DecisionTree tree;
    grow(tree, rows, 0);
    return tree;
  }

 private:
  struct Split {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double score = 0.0;
  };

  ClassCounts counts_of(const std::vector<std::uint32_t>& rows) const {
    ClassCounts c{};
    for (auto r : rows) ++c[index_of(data_[r].y)];
    return c;
  }

  std::int32_t grow(DecisionTree& tree, const std::vector<std::uint32_t>& rows, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const ClassCounts counts = counts_of(rows);
    tree.nodes[id].label = majority(counts);
    const double parent = gini(counts);
    if (parent == 0.0 || depth >= p_.max_depth || rows.size() < p_.min_samples_split) return id;

    const Split best = find_split(rows, counts, parent);
    if (best.feature < 0) return id;

    std::vector<std::uint32_t> left_rows, right_rows;
    for (auto r : rows) {
      double value = 0.0;
      for (const auto& e : data_[r].x.entries) {
        if (e.index == static_cast<std::uint32_t>(best.feature)) {
          value = e.weight;
          break;
        }
      }
      (value > best.threshold ? right_rows : left_rows).push_back(r);
    }
    tree.nodes[id].feature = best.feature;
    tree.nodes[id].threshold = best.threshold;
    const auto l = grow(tree, left_rows, depth + 1);
    const auto rgt = grow(tree, right_rows, depth + 1);
    tree.nodes[id].left = l;
    tree.nodes[id].right = rgt;
    return id;
  }

  Split find_split(const std::vector<std::uint32_t>& rows, const ClassCounts& counts, double parent) {
    // Features present in the node, in first-seen order.
    std::vector<std::uint32_t> present;
    for (auto r : rows) {
      for (const auto& e : data_[r].x.entries) {
        if (slot_[e.index] == -1) {
          slot_[e.index] = -2;
          present.push_back(e.index);
        }
      }
    }
    const std::size_t take = std::min(subsample_, present.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(present[i], present[i + rng_.below(present.size() - i)]);
    }
    for (auto f : present) slot_[f] = -1;
    std::vector<std::uint32_t> candidates(present.begin(), present.begin() + static_cast<std::ptrdiff_t>(take));
    std::sort(candidates.begin(), candidates.end());
    for (std::size_t s = 0; s < candidates.size(); ++s) slot_[candidates[s]] = static_cast<std::int32_t>(s);

    std::vector<std::vector<std::pair<double, Sentiment>>> values(candidates.size());
    for (auto r : rows) {
      for (const auto& e : data_[r].x.entries) {
        if (slot_[e.index] >= 0) values[static_cast<std::size_t>(slot_[e.index])].emplace_back(e.weight, data_[r].y);
      }
    }
    for (auto f : candidates) slot_[f] = -1;

    Split best;
    best.score = parent - 1e-12;
    const std::size_t n = rows.size();
    for (std::size_t s = 0; s < candidates.size(); ++s) {
      auto& vals = values[s];
      std::sort(vals.begin(), vals.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      // Left starts with the implicit zeros.
      ClassCounts left = counts;
      for (const auto& [v, y] : vals) --left[index_of(y)];
      ClassCounts right{};
      for (const auto& [v, y] : vals) ++right[index_of(y)];
      std::size_t n_left = n - vals.size();
      double prev = 0.0;
      std::size_t k = 0;
      // Walk thresholds upward: before moving each run of equal values left,
      // evaluate the cut between prev and that value.
      while (k < vals.size()) {
        const double v = vals[k].first;
        if (n_left > 0 && v > prev) {
          const double score = split_gini(left, right);
          if (score < best.score) {
            best = {static_cast<std::int32_t>(candidates[s]), 0.5 * (prev + v), score};
          }
        }
        while (k < vals.size() && vals[k].first == v) {
          ++left[index_of(vals[k].second)];
          --right[index_of(vals[k].second)];
          ++n_left;
          ++k;
        }
        prev = v;
      }
    }
    return best;
  }

  const SampleView& data_;
  const RandomForestParams& p_;
  std::size_t subsample_;
  Rng& rng_;
  std::vector<std::int32_t> slot_;
};

}  // namespace forest_detail

inline std::size_t default_feature_subsample(std::size_t dimension) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dimension)))));
}

inline DecisionTree train_tree(const SampleView& data, std::size_t dimension, const RandomForestParams& p,
                               std::size_t subsample, Rng& rng) {
  return forest_detail::TreeBuilder(data, dimension, p, subsample, rng).build();
}

// Tree t draws its bootstrap and feature subsets from Rng::derive(seed, {t}).
inline RandomForestModel train_rf(const SampleView& data, std::size_t dimension, const RandomForestParams& p) {
  if (p.n_trees < 1) throw PreconditionError("train_rf: n_trees must be >= 1");
  if (data.empty()) throw PreconditionError("train_rf: empty data");
  RandomForestModel m;
  m.seed = p.seed;
  m.feature_subsample = p.feature_subsample ? p.feature_subsample : default_feature_subsample(dimension);
  for (std::size_t t = 0; t < p.n_trees; ++t) {
    Rng rng = Rng::derive(p.seed, {t});
    if (p.bootstrap) {
      std::vector<std::uint32_t> rows(data.size());
      for (auto& r : rows) r = data.rows()[rng.below(data.size())];
      m.trees.push_back(train_tree(SampleView(data.data(), std::move(rows)), dimension, p, m.feature_subsample, rng));
    } else {
      m.trees.push_back(train_tree(data, dimension, p, m.feature_subsample, rng));
    }
  }
  return m;
}

}  // namespace sentilab
