#pragma once
// Linear classifiers trained by SGD: logistic regression (log-loss) and a
// linear SVM (hinge loss), both with an L2 penalty. Targets are +1 for
// Positive and -1 for Negative. The objective is
//   J(w, b) = mean_i loss(y_i * (w.x_i + b)) + (lambda / 2) * |w|^2
// and the step size at update t (1-based, counted across epochs) is
// learning_rate / sqrt(t).
//
// The weight vector is stored as scale * raw so the per-step L2 shrink is
// O(1) instead of O(V); sparse gradient steps touch only a sample's entries.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "sentilab/classifiers/dataset.hpp"
#include "sentilab/util/error.hpp"
#include "sentilab/util/rng.hpp"

namespace sentilab {

enum class LinearKind { Logistic, HingeSvm };

constexpr std::string_view to_string(LinearKind k) noexcept { return k == LinearKind::Logistic ? "Logistic" : "HingeSvm"; }

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  LinearKind kind = LinearKind::Logistic;
  double l2_lambda = 0.0;
  std::vector<double> loss_trajectory;  // objective after each epoch

  double margin(const DocumentVector& v) const {
    double m = bias;
    for (const auto& e : v.entries) {
      if (e.index < weights.size()) m += e.weight * weights[e.index];
    }
    return m;
  }
};

struct LinearParams {
  LinearKind kind = LinearKind::Logistic;
  std::size_t epochs = 20;
  double learning_rate = 0.1;
  double l2_lambda = 1e-4;
  std::uint64_t seed = 0;
};

struct LinearPrediction {
  Sentiment label = Sentiment::Positive;
  double margin = 0.0;
};

// Positive iff margin >= 0.
inline LinearPrediction predict_linear(const LinearModel& m, const DocumentVector& v) {
  const double margin = m.margin(v);
  return {margin >= 0.0 ? Sentiment::Positive : Sentiment::Negative, margin};
}

namespace linear_detail {

inline double stable_log1p_exp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Per-sample loss of signed margin y*m.
inline double loss(LinearKind kind, double ym) {
  return kind == LinearKind::Logistic ? stable_log1p_exp(-ym) : std::max(0.0, 1.0 - ym);
}

// d loss / d m for target y and margin m.
inline double loss_slope(LinearKind kind, double y, double m) {
  if (kind == LinearKind::Logistic) return -y * sigmoid(-y * m);
  return y * m < 1.0 ? -y : 0.0;
}

}  // namespace linear_detail

using SignedTarget = std::function<double(const Example&)>;

inline SignedTarget positive_vs_negative() {
  return [](const Example& ex) { return ex.y == Sentiment::Positive ? 1.0 : -1.0; };
}

inline double linear_objective(const LinearModel& m, const SampleView& data, const SignedTarget& target) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += linear_detail::loss(m.kind, target(data[i]) * m.margin(data[i].x));
  }
  double sq = 0.0;
  for (double w : m.weights) sq += w * w;
  return total / static_cast<double>(data.size()) + 0.5 * m.l2_lambda * sq;
}

struct LinearGradient {
  std::vector<double> weights;
  double bias = 0.0;
};

// Full-batch gradient of linear_objective.
inline LinearGradient linear_gradient(const LinearModel& m, const SampleView& data, const SignedTarget& target) {
  LinearGradient g;
  g.weights.assign(m.weights.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& ex = data[i];
    const double slope = linear_detail::loss_slope(m.kind, target(ex), m.margin(ex.x)) * inv_n;
    for (const auto& e : ex.x.entries) g.weights[e.index] += slope * e.weight;
    g.bias += slope;
  }
  for (std::size_t k = 0; k < g.weights.size(); ++k) g.weights[k] += m.l2_lambda * m.weights[k];
  return g;
}

// SGD on an arbitrary +1/-1 target; used directly by one-vs-rest.
inline LinearModel train_linear_signed(const SampleView& data, std::size_t dimension, const SignedTarget& target,
                                       const LinearParams& p) {
  if (p.epochs < 1) throw PreconditionError("train_linear: epochs must be >= 1");
  if (data.empty()) throw PreconditionError("train_linear: empty data");
  LinearModel m;
  m.kind = p.kind;
  m.l2_lambda = p.l2_lambda;
  std::vector<double> raw(dimension, 0.0);
  double scale = 1.0;
  double bias = 0.0;
  std::vector<double> targets(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) targets[i] = target(data[i]);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(p.seed);
  std::uint64_t t = 0;

  auto fold_scale = [&] {
    for (double& r : raw) r *= scale;
    scale = 1.0;
  };

  for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t i : order) {
      ++t;
      const double eta = p.learning_rate / std::sqrt(static_cast<double>(t));
      const auto& x = data[i].x;
      double m_raw = 0.0;
      for (const auto& e : x.entries) {
        if (e.index >= dimension) throw PreconditionError("train_linear: term index beyond dimension");
        m_raw += e.weight * raw[e.index];
      }
      const double margin = scale * m_raw + bias;
      const double slope = linear_detail::loss_slope(p.kind, targets[i], margin);
      const double shrink = 1.0 - eta * p.l2_lambda;
      if (shrink <= 0.0) {
        std::fill(raw.begin(), raw.end(), 0.0);
        scale = 1.0;
      } else {
        scale *= shrink;
      }
      if (slope != 0.0) {
        const double step = eta * slope / scale;
        for (const auto& e : x.entries) raw[e.index] -= step * e.weight;
        bias -= eta * slope;
      }
      if (scale < 1e-9) fold_scale();
    }
    m.weights.resize(dimension);
    for (std::size_t k = 0; k < dimension; ++k) m.weights[k] = scale * raw[k];
    m.bias = bias;
    m.loss_trajectory.push_back(linear_objective(m, data, [&](const Example& ex) { return target(ex); }));
  }
  return m;
}

// Binary Positive/Negative training. Neutral labels need one-vs-rest.
inline LinearModel train_linear(const SampleView& data, std::size_t dimension, const LinearParams& p) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].y == Sentiment::Neutral) {
      throw PreconditionError("train_linear: more than two classes; use the one-vs-rest wrapper");
    }
  }
  return train_linear_signed(data, dimension, positive_vs_negative(), p);
}

inline LinearModel train_linear(std::span<const Example> data, std::size_t dimension, const LinearParams& p) {
  return train_linear(SampleView(data), dimension, p);
}

}  // namespace sentilab
