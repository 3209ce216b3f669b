#pragma once
// Binary sequence classifiers over word embeddings with hand-written
// backpropagation: an Elman RNN, an LSTM, and a one-layer 1-D CNN.
//
//   RNN   h_t = tanh(Wx e_t + Wh h_{t-1} + b)
//   LSTM  [i f o g] = [sig sig sig tanh](W e_t + U h_{t-1} + b)
//         c_t = f * c_{t-1} + i * g,  h_t = o * tanh(c_t)
//   CNN   a_p = relu(Wc [e_p .. e_{p+w-1}] + bc),  z = max_p a_p
//
// The recurrent models classify from h at the row's last real token; the CNN
// from the pooled features. logits = Wo h + bo, softmax over
// (Positive, Negative), mean cross-entropy loss. Only a row's real tokens are
// ever processed, so padding never changes a prediction. For the CNN, rows
// shorter than the filter width get one window whose tail is zero vectors;
// empty rows pool to 0.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sentilab/neural/sequence.hpp"
#include "sentilab/sentiment.hpp"
#include "sentilab/util/error.hpp"
#include "sentilab/util/rng.hpp"

namespace sentilab::neural {

enum class Arch { RNN, LSTM, CNN };

constexpr std::string_view to_string(Arch a) noexcept {
  switch (a) {
    case Arch::RNN: return "RNN";
    case Arch::LSTM: return "LSTM";
    case Arch::CNN: return "CNN";
  }
  return "?";
}

inline std::optional<Arch> parse_arch(std::string_view s) {
  if (s == "RNN" || s == "rnn") return Arch::RNN;
  if (s == "LSTM" || s == "lstm") return Arch::LSTM;
  if (s == "CNN" || s == "cnn") return Arch::CNN;
  return std::nullopt;
}

struct NeuralConfig {
  Arch arch = Arch::LSTM;
  std::size_t max_len = 200;
  std::size_t embed_dim = 100;
  std::size_t hidden_units = 100;
  std::size_t cnn_filters = 64;
  std::size_t cnn_width = 3;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  bool freeze_embeddings = false;
  std::size_t jobs = 1;  // worker threads for per-sample gradients; results do not depend on it

  static NeuralConfig defaults_for(Arch arch) {
    NeuralConfig c;
    c.arch = arch;
    c.learning_rate = arch == Arch::CNN ? 0.05 : 0.1;
    return c;
  }

  void validate() const {
    if (epochs < 1) throw PreconditionError("neural config: epochs must be >= 1");
    if (max_len < 1 || embed_dim < 1 || hidden_units < 1 || cnn_filters < 1 || cnn_width < 1 || batch_size < 1) {
      throw PreconditionError("neural config: all sizes must be positive");
    }
    if (!(learning_rate >= 0.0)) throw PreconditionError("neural config: learning_rate must be >= 0");
  }

  nlohmann::ordered_json to_json() const {
    return {{"arch", std::string(to_string(arch))}, {"max_len", max_len},     {"embed_dim", embed_dim},
            {"hidden_units", hidden_units},        {"cnn_filters", cnn_filters}, {"cnn_width", cnn_width},
            {"epochs", epochs},                    {"batch_size", batch_size}, {"learning_rate", learning_rate},
            {"seed", seed},                        {"freeze_embeddings", freeze_embeddings}};
  }

  static NeuralConfig from_json(const nlohmann::json& j, NeuralConfig c) {
    if (j.contains("arch")) {
      auto a = parse_arch(j.at("arch").get<std::string>());
      if (!a) throw PreconditionError("neural config: unknown arch");
      c.arch = *a;
    }
    c.max_len = j.value("max_len", c.max_len);
    c.embed_dim = j.value("embed_dim", c.embed_dim);
    c.hidden_units = j.value("hidden_units", c.hidden_units);
    c.cnn_filters = j.value("cnn_filters", c.cnn_filters);
    c.cnn_width = j.value("cnn_width", c.cnn_width);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.seed = j.value("seed", c.seed);
    c.freeze_embeddings = j.value("freeze_embeddings", c.freeze_embeddings);
    return c;
  }
};

struct Tensor {
  std::string name;
  Eigen::MatrixXd value;
};

// params[0] is always the embedding matrix ("embedding", (V+1) x d).
// RNN:  Wx (H x d), Wh (H x H), b (H x 1), Wo (2 x H), bo (2 x 1)
// LSTM: W (4H x d), U (4H x H), b (4H x 1), Wo (2 x H), bo (2 x 1); gate rows i, f, o, g
// CNN:  Wc (F x w*d), bc (F x 1), Wo (2 x F), bo (2 x 1)
struct NeuralNet {
  NeuralConfig config;
  std::vector<Tensor> params;

  const Eigen::MatrixXd& embedding() const { return params[0].value; }
  std::size_t dimension() const { return static_cast<std::size_t>(params[0].value.cols()); }
};

inline std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>> expected_shapes(
    const NeuralConfig& c, Eigen::Index vocab_rows, Eigen::Index d) {
  const auto H = static_cast<Eigen::Index>(c.hidden_units);
  const auto F = static_cast<Eigen::Index>(c.cnn_filters);
  const auto w = static_cast<Eigen::Index>(c.cnn_width);
  switch (c.arch) {
    case Arch::RNN:
      return {{"embedding", {vocab_rows, d}}, {"Wx", {H, d}}, {"Wh", {H, H}}, {"b", {H, 1}}, {"Wo", {2, H}}, {"bo", {2, 1}}};
    case Arch::LSTM:
      return {{"embedding", {vocab_rows, d}}, {"W", {4 * H, d}}, {"U", {4 * H, H}}, {"b", {4 * H, 1}},
              {"Wo", {2, H}},                 {"bo", {2, 1}}};
    case Arch::CNN:
      return {{"embedding", {vocab_rows, d}}, {"Wc", {F, w * d}}, {"bc", {F, 1}}, {"Wo", {2, F}}, {"bo", {2, 1}}};
  }
  return {};
}

inline void check_shapes(const NeuralNet& net) {
  if (net.params.empty()) throw PreconditionError("network has no parameters");
  const auto expected = expected_shapes(net.config, net.params[0].value.rows(), net.params[0].value.cols());
  if (expected.size() != net.params.size()) throw PreconditionError("network: wrong number of tensors");
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const auto& [name, shape] = expected[k];
    const auto& t = net.params[k];
    if (t.name != name || t.value.rows() != shape.first || t.value.cols() != shape.second) {
      throw PreconditionError("tensor " + t.name + " has shape " + std::to_string(t.value.rows()) + "x" +
                              std::to_string(t.value.cols()) + ", expected " + name + " " +
                              std::to_string(shape.first) + "x" + std::to_string(shape.second));
    }
  }
}

// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases 0, drawn from
// Rng::derive(config.seed, {tensor index}).
inline NeuralNet initialize(const NeuralConfig& config, Eigen::MatrixXd embedding) {
  config.validate();
  NeuralNet net;
  net.config = config;
  const auto shapes = expected_shapes(config, embedding.rows(), embedding.cols());
  net.params.push_back({"embedding", std::move(embedding)});
  for (std::size_t k = 1; k < shapes.size(); ++k) {
    const auto& [name, shape] = shapes[k];
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(shape.first, shape.second);
    if (shape.second > 1) {
      const double limit = std::sqrt(6.0 / static_cast<double>(shape.first + shape.second));
      Rng rng = Rng::derive(config.seed, {k});
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-limit, limit);
    }
    net.params.push_back({name, std::move(m)});
  }
  return net;
}

// Activations of one row kept for backward.
struct SampleCache {
  std::vector<std::int32_t> ids;
  std::vector<Eigen::VectorXd> h;      // RNN/LSTM: h[0] = 0, h[t] after token t
  std::vector<Eigen::VectorXd> c;      // LSTM cell states, c[0] = 0
  std::vector<Eigen::VectorXd> gates;  // LSTM activated [i f o g] per step
  std::vector<Eigen::VectorXd> windows;      // CNN window inputs
  std::vector<Eigen::VectorXd> conv;         // CNN pre-activations per window
  Eigen::VectorXd pooled;                    // CNN
  std::vector<std::int32_t> argmax;          // CNN winning window per filter (-1 if none)
  Eigen::Vector2d probs = Eigen::Vector2d::Constant(0.5);
};

struct ForwardResult {
  Eigen::MatrixXd probabilities;  // rows x 2: P(Positive), P(Negative)
  std::vector<SampleCache> caches;
  double loss = 0.0;  // mean cross-entropy
};

struct Gradients {
  std::vector<Eigen::MatrixXd> dense;                     // parallel to params; dense[0] unused
  std::map<std::int32_t, Eigen::VectorXd> embedding_rows;  // row id -> gradient of that row

  static Gradients zeros_like(const NeuralNet& net) {
    Gradients g;
    g.dense.push_back(Eigen::MatrixXd());
    for (std::size_t k = 1; k < net.params.size(); ++k) {
      g.dense.push_back(Eigen::MatrixXd::Zero(net.params[k].value.rows(), net.params[k].value.cols()));
    }
    return g;
  }

  void add(const Gradients& other) {
    for (std::size_t k = 1; k < dense.size(); ++k) dense[k] += other.dense[k];
    for (const auto& [row, g] : other.embedding_rows) {
      auto it = embedding_rows.find(row);
      if (it == embedding_rows.end()) embedding_rows.emplace(row, g);
      else it->second += g;
    }
  }

  void set_zero() {
    for (std::size_t k = 1; k < dense.size(); ++k) dense[k].setZero();
    embedding_rows.clear();
  }
};

inline std::size_t label_index(Sentiment s) {
  if (s == Sentiment::Neutral) throw PreconditionError("neural models are binary; Neutral labels are not allowed");
  return s == Sentiment::Positive ? 0 : 1;
}

namespace net_detail {

inline Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
  Eigen::VectorXd out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out(i) = z(i) >= 0 ? 1.0 / (1.0 + std::exp(-z(i))) : std::exp(z(i)) / (1.0 + std::exp(z(i)));
  }
  return out;
}

inline Eigen::Vector2d softmax(const Eigen::Vector2d& logits) {
  const double m = logits.maxCoeff();
  Eigen::Vector2d e = (logits.array() - m).exp();
  return e / e.sum();
}

inline Eigen::VectorXd embed(const NeuralNet& net, std::int32_t id) { return net.embedding().row(id).transpose(); }

inline void forward_rnn(const NeuralNet& net, SampleCache& s) {
  const auto& Wx = net.params[1].value;
  const auto& Wh = net.params[2].value;
  const auto& b = net.params[3].value;
  const auto H = Wh.rows();
  s.h.assign(1, Eigen::VectorXd::Zero(H));
  for (auto id : s.ids) {
    Eigen::VectorXd a = Wx * embed(net, id) + Wh * s.h.back() + b.col(0);
    s.h.push_back(a.array().tanh().matrix());
  }
  const Eigen::Vector2d logits = net.params[4].value * s.h.back() + net.params[5].value.col(0);
  s.probs = softmax(logits);
}

inline void forward_lstm(const NeuralNet& net, SampleCache& s) {
  const auto& W = net.params[1].value;
  const auto& U = net.params[2].value;
  const auto& b = net.params[3].value;
  const auto H = U.cols();
  s.h.assign(1, Eigen::VectorXd::Zero(H));
  s.c.assign(1, Eigen::VectorXd::Zero(H));
  s.gates.clear();
  for (auto id : s.ids) {
    const Eigen::VectorXd z = W * embed(net, id) + U * s.h.back() + b.col(0);
    Eigen::VectorXd act(4 * H);
    act.head(3 * H) = sigmoid(z.head(3 * H));
    act.tail(H) = z.tail(H).array().tanh().matrix();
    const auto i = act.segment(0, H);
    const auto f = act.segment(H, H);
    const auto o = act.segment(2 * H, H);
    const auto g = act.segment(3 * H, H);
    Eigen::VectorXd c = f.cwiseProduct(s.c.back()) + i.cwiseProduct(g);
    Eigen::VectorXd h = o.cwiseProduct(c.array().tanh().matrix());
    s.gates.push_back(std::move(act));
    s.c.push_back(std::move(c));
    s.h.push_back(std::move(h));
  }
  const Eigen::Vector2d logits = net.params[4].value * s.h.back() + net.params[5].value.col(0);
  s.probs = softmax(logits);
}

inline void forward_cnn(const NeuralNet& net, SampleCache& s) {
  const auto& Wc = net.params[1].value;
  const auto& bc = net.params[2].value;
  const auto F = Wc.rows();
  const auto d = static_cast<Eigen::Index>(net.dimension());
  const auto width = static_cast<std::size_t>(net.config.cnn_width);
  const std::size_t L = s.ids.size();
  const std::size_t n_windows = L == 0 ? 0 : (L >= width ? L - width + 1 : 1);
  s.windows.clear();
  s.conv.clear();
  s.pooled = Eigen::VectorXd::Zero(F);
  s.argmax.assign(static_cast<std::size_t>(F), -1);
  std::vector<bool> seen(static_cast<std::size_t>(F), false);
  for (std::size_t p = 0; p < n_windows; ++p) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width) * d);
    for (std::size_t k = 0; k < width && p + k < L; ++k) {
      u.segment(static_cast<Eigen::Index>(k) * d, d) = embed(net, s.ids[p + k]);
    }
    Eigen::VectorXd z = Wc * u + bc.col(0);
    for (Eigen::Index f = 0; f < F; ++f) {
      const double a = std::max(0.0, z(f));
      const auto fi = static_cast<std::size_t>(f);
      if (!seen[fi] || a > s.pooled(f)) {
        seen[fi] = true;
        s.pooled(f) = a;
        s.argmax[fi] = static_cast<std::int32_t>(p);
      }
    }
    s.windows.push_back(std::move(u));
    s.conv.push_back(std::move(z));
  }
  const Eigen::Vector2d logits = net.params[3].value * s.pooled + net.params[4].value.col(0);
  s.probs = softmax(logits);
}

inline void add_embedding_grad(Gradients& g, std::int32_t id, const Eigen::VectorXd& d) {
  auto it = g.embedding_rows.find(id);
  if (it == g.embedding_rows.end()) g.embedding_rows.emplace(id, d);
  else it->second += d;
}

// Adds scale * d(-log p_label)/d(params) for one row.
inline void backward_sample(const NeuralNet& net, const SampleCache& s, std::size_t label, double scale,
                            Gradients& g) {
  Eigen::Vector2d dlogits = s.probs;
  dlogits(static_cast<Eigen::Index>(label)) -= 1.0;
  dlogits *= scale;
  const bool train_embedding = !net.config.freeze_embeddings;

  switch (net.config.arch) {
    case Arch::RNN: {
      const auto& Wx = net.params[1].value;
      const auto& Wh = net.params[2].value;
      const auto& Wo = net.params[4].value;
      g.dense[4] += dlogits * s.h.back().transpose();
      g.dense[5].col(0) += dlogits;
      Eigen::VectorXd dh = Wo.transpose() * dlogits;
      for (std::size_t t = s.ids.size(); t >= 1; --t) {
        const Eigen::VectorXd da = dh.cwiseProduct((1.0 - s.h[t].array().square()).matrix());
        const Eigen::VectorXd x = embed(net, s.ids[t - 1]);
        g.dense[1] += da * x.transpose();
        g.dense[2] += da * s.h[t - 1].transpose();
        g.dense[3].col(0) += da;
        if (train_embedding) add_embedding_grad(g, s.ids[t - 1], Wx.transpose() * da);
        dh = Wh.transpose() * da;
      }
      break;
    }
    case Arch::LSTM: {
      const auto& W = net.params[1].value;
      const auto& U = net.params[2].value;
      const auto& Wo = net.params[4].value;
      const auto H = U.cols();
      g.dense[4] += dlogits * s.h.back().transpose();
      g.dense[5].col(0) += dlogits;
      Eigen::VectorXd dh = Wo.transpose() * dlogits;
      Eigen::VectorXd dc = Eigen::VectorXd::Zero(H);
      Eigen::VectorXd dz(4 * H);
      for (std::size_t t = s.ids.size(); t >= 1; --t) {
        const auto& act = s.gates[t - 1];
        const auto i = act.segment(0, H);
        const auto f = act.segment(H, H);
        const auto o = act.segment(2 * H, H);
        const auto gg = act.segment(3 * H, H);
        const Eigen::VectorXd tc = s.c[t].array().tanh().matrix();
        const Eigen::VectorXd d_o = dh.cwiseProduct(tc);
        dc += dh.cwiseProduct(o).cwiseProduct((1.0 - tc.array().square()).matrix());
        const Eigen::VectorXd d_i = dc.cwiseProduct(gg);
        const Eigen::VectorXd d_g = dc.cwiseProduct(i);
        const Eigen::VectorXd d_f = dc.cwiseProduct(s.c[t - 1]);
        dz.segment(0, H) = d_i.cwiseProduct(i).cwiseProduct((1.0 - i.array()).matrix());
        dz.segment(H, H) = d_f.cwiseProduct(f).cwiseProduct((1.0 - f.array()).matrix());
        dz.segment(2 * H, H) = d_o.cwiseProduct(o).cwiseProduct((1.0 - o.array()).matrix());
        dz.segment(3 * H, H) = d_g.cwiseProduct((1.0 - gg.array().square()).matrix());
        const Eigen::VectorXd x = embed(net, s.ids[t - 1]);
        g.dense[1] += dz * x.transpose();
        g.dense[2] += dz * s.h[t - 1].transpose();
        g.dense[3].col(0) += dz;
        if (train_embedding) add_embedding_grad(g, s.ids[t - 1], W.transpose() * dz);
        dh = U.transpose() * dz;
        dc = dc.cwiseProduct(f);
      }
      break;
    }
    case Arch::CNN: {
      const auto& Wc = net.params[1].value;
      const auto& Wo = net.params[3].value;
      const auto d = static_cast<Eigen::Index>(net.dimension());
      const std::size_t width = net.config.cnn_width;
      g.dense[3] += dlogits * s.pooled.transpose();
      g.dense[4].col(0) += dlogits;
      const Eigen::VectorXd dpooled = Wo.transpose() * dlogits;
      std::vector<Eigen::VectorXd> dwindow(s.windows.size());
      for (std::size_t f = 0; f < s.argmax.size(); ++f) {
        const auto p = s.argmax[f];
        if (p < 0) continue;
        const auto pi = static_cast<std::size_t>(p);
        const auto fe = static_cast<Eigen::Index>(f);
        if (s.conv[pi](fe) <= 0.0) continue;
        const double dzf = dpooled(fe);
        g.dense[1].row(fe) += dzf * s.windows[pi].transpose();
        g.dense[2](fe, 0) += dzf;
        if (train_embedding) {
          if (dwindow[pi].size() == 0) dwindow[pi] = Eigen::VectorXd::Zero(s.windows[pi].size());
          dwindow[pi] += dzf * Wc.row(fe).transpose();
        }
      }
      if (train_embedding) {
        for (std::size_t p = 0; p < dwindow.size(); ++p) {
          if (dwindow[p].size() == 0) continue;
          for (std::size_t k = 0; k < width && p + k < s.ids.size(); ++k) {
            add_embedding_grad(g, s.ids[p + k], dwindow[p].segment(static_cast<Eigen::Index>(k) * d, d));
          }
        }
      }
      break;
    }
  }
}

}  // namespace net_detail

inline SampleCache forward_sample(const NeuralNet& net, std::span<const std::int32_t> ids) {
  SampleCache s;
  s.ids.assign(ids.begin(), ids.end());
  switch (net.config.arch) {
    case Arch::RNN: net_detail::forward_rnn(net, s); break;
    case Arch::LSTM: net_detail::forward_lstm(net, s); break;
    case Arch::CNN: net_detail::forward_cnn(net, s); break;
  }
  return s;
}

inline ForwardResult forward(const NeuralNet& net, const SequenceBatch& batch) {
  check_shapes(net);
  ForwardResult r;
  r.probabilities.resize(static_cast<Eigen::Index>(batch.rows()), 2);
  r.caches.reserve(batch.rows());
  for (std::size_t row = 0; row < batch.rows(); ++row) {
    r.caches.push_back(forward_sample(net, batch.tokens(row)));
    const auto& p = r.caches.back().probs;
    r.probabilities.row(static_cast<Eigen::Index>(row)) = p.transpose();
    r.loss -= std::log(p(static_cast<Eigen::Index>(label_index(batch.labels[row]))));
  }
  if (batch.rows() > 0) r.loss /= static_cast<double>(batch.rows());
  return r;
}

// Gradients of the mean cross-entropy of `fwd` with respect to every parameter.
inline Gradients backward(const NeuralNet& net, const ForwardResult& fwd, std::span<const Sentiment> labels) {
  if (labels.size() != fwd.caches.size()) throw PreconditionError("backward: labels/cache size mismatch");
  Gradients g = Gradients::zeros_like(net);
  if (labels.empty()) return g;
  const double scale = 1.0 / static_cast<double>(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    net_detail::backward_sample(net, fwd.caches[k], label_index(labels[k]), scale, g);
  }
  return g;
}

inline double loss(const NeuralNet& net, const SequenceBatch& batch) { return forward(net, batch).loss; }

inline std::vector<Sentiment> predict(const NeuralNet& net, const SequenceBatch& batch) {
  std::vector<Sentiment> out;
  out.reserve(batch.rows());
  for (std::size_t row = 0; row < batch.rows(); ++row) {
    const auto s = forward_sample(net, batch.tokens(row));
    out.push_back(s.probs(0) >= s.probs(1) ? Sentiment::Positive : Sentiment::Negative);
  }
  return out;
}

}  // namespace sentilab::neural
