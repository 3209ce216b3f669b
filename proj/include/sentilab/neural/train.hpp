#pragma once
// Mini-batch SGD for the sequence classifiers, per-epoch history, and the
// checkpoint format (the classifier model layout with tensor blocks).
//
// Within a batch, samples are processed in fixed chunks of kChunk rows. Each
// chunk's gradient is accumulated serially and chunk sums are added in chunk
// order, so any number of worker threads gives bit-identical parameters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "sentilab/neural/network.hpp"
#include "sentilab/util/csv.hpp"
#include "sentilab/util/io.hpp"
#include "sentilab/util/tokens.hpp"

namespace sentilab::neural {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainingHistory {
  std::vector<EpochRecord> records;

  std::string to_csv() const {
    std::string out = csv::format_row({"epoch", "train_loss", "train_acc", "val_loss", "val_acc"});
    for (const auto& r : records) {
      out += csv::format_row({std::to_string(r.epoch), format_double(r.train_loss), format_double(r.train_accuracy),
                              format_double(r.val_loss), format_double(r.val_accuracy)});
    }
    return out;
  }
};

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<Sentiment> predictions;
};

inline Evaluation evaluate(const NeuralNet& net, const SequenceBatch& batch) {
  Evaluation e;
  if (batch.rows() == 0) return e;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const auto s = forward_sample(net, batch.tokens(r));
    const auto y = label_index(batch.labels[r]);
    e.loss -= std::log(s.probs(static_cast<Eigen::Index>(y)));
    const Sentiment pred = s.probs(0) >= s.probs(1) ? Sentiment::Positive : Sentiment::Negative;
    e.predictions.push_back(pred);
    if (pred == batch.labels[r]) ++correct;
  }
  e.loss /= static_cast<double>(batch.rows());
  e.accuracy = static_cast<double>(correct) / static_cast<double>(batch.rows());
  return e;
}

// Mean-loss gradient over `rows` of `batch`, independent of `jobs`.
inline Gradients batch_gradient(const NeuralNet& net, const SequenceBatch& batch, std::span<const std::size_t> rows,
                                std::size_t jobs) {
  constexpr std::size_t kChunk = 4;
  const std::size_t n_chunks = (rows.size() + kChunk - 1) / kChunk;
  const double scale = rows.empty() ? 0.0 : 1.0 / static_cast<double>(rows.size());
  std::vector<Gradients> partial(n_chunks, Gradients::zeros_like(net));
  auto work = [&](std::size_t c) {
    for (std::size_t k = c * kChunk; k < std::min(rows.size(), (c + 1) * kChunk); ++k) {
      const auto s = forward_sample(net, batch.tokens(rows[k]));
      net_detail::backward_sample(net, s, label_index(batch.labels[rows[k]]), scale, partial[c]);
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n_chunks));
  if (workers == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) work(c);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < n_chunks; c += workers) work(c);
      });
    }
    for (auto& t : pool) t.join();
  }
  Gradients total = Gradients::zeros_like(net);
  for (const auto& p : partial) total.add(p);
  return total;
}

inline void sgd_step(NeuralNet& net, const Gradients& g, double lr) {
  for (std::size_t k = 1; k < net.params.size(); ++k) net.params[k].value -= lr * g.dense[k];
  if (!net.config.freeze_embeddings) {
    for (const auto& [row, grad] : g.embedding_rows) net.params[0].value.row(row) -= lr * grad.transpose();
  }
}

struct TrainResult {
  NeuralNet net;
  TrainingHistory history;
};

// An empty validation batch falls back to the training batch.
inline TrainResult train(NeuralNet net, const SequenceBatch& train_data, const SequenceBatch& val_data) {
  const auto& cfg = net.config;
  cfg.validate();
  check_shapes(net);
  if (train_data.rows() == 0) throw PreconditionError("train: no training rows");
  const SequenceBatch& val = val_data.rows() == 0 ? train_data : val_data;

  TrainResult out;
  std::vector<std::size_t> order(train_data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng = Rng::derive(cfg.seed, {0x5348u, epoch});
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const Gradients g = batch_gradient(net, train_data, rows, cfg.jobs);
      sgd_step(net, g, cfg.learning_rate);
    }
    const auto tr = evaluate(net, train_data);
    const auto va = evaluate(net, val);
    if (!std::isfinite(tr.loss) || !std::isfinite(va.loss)) throw DivergenceError(epoch, "non-finite loss");
    out.history.records.push_back({epoch, tr.loss, tr.accuracy, va.loss, va.accuracy});
  }
  out.net = std::move(net);
  return out;
}

// `extra` keys are stored alongside the network config (e.g. the text pipeline).
inline std::string save_checkpoint(const NeuralNet& net, std::string_view vocab_hash,
                                   const nlohmann::ordered_json& extra = nlohmann::ordered_json::object()) {
  auto config = net.config.to_json();
  for (const auto& [k, v] : extra.items()) config[k] = v;
  TokenWriter w;
  w.word("sentilab-model").integer(1).newline();
  w.word("kind").word(to_string(net.config.arch)).newline();
  w.word("vocab_hash").word(vocab_hash.empty() ? "-" : vocab_hash).newline();
  w.word("config").text(config.dump()).newline();
  w.word("tensors").integer(static_cast<long long>(net.params.size())).newline();
  for (const auto& t : net.params) {
    w.word("tensor").word(t.name).integer(t.value.rows()).integer(t.value.cols());
    for (Eigen::Index r = 0; r < t.value.rows(); ++r)
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) w.number(t.value(r, c));
    w.newline();
  }
  w.word("end").newline();
  return w.str();
}

inline NeuralNet load_checkpoint(std::string_view text, std::string_view expected_vocab_hash = {},
                                 nlohmann::json* config_out = nullptr) {
  TokenReader r(text);
  r.expect("sentilab-model");
  if (r.integer() != 1) throw InputError("checkpoint: unsupported format version");
  r.expect("kind");
  const auto arch = parse_arch(r.word());
  if (!arch) throw InputError("checkpoint: unknown architecture");
  r.expect("vocab_hash");
  const auto hash = r.word();
  if (!expected_vocab_hash.empty() && hash != expected_vocab_hash) {
    throw InputError("checkpoint vocabulary hash " + hash + " does not match vocabulary " +
                     std::string(expected_vocab_hash));
  }
  r.expect("config");
  NeuralNet net;
  const auto config = nlohmann::json::parse(r.text());
  if (config_out) *config_out = config;
  net.config = NeuralConfig::from_json(config, NeuralConfig::defaults_for(*arch));
  net.config.arch = *arch;
  r.expect("tensors");
  const std::size_t n = r.count();
  for (std::size_t k = 0; k < n; ++k) {
    r.expect("tensor");
    Tensor t;
    t.name = r.word();
    const auto rows = r.count();
    const auto cols = r.count();
    t.value.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < t.value.rows(); ++i)
      for (Eigen::Index j = 0; j < t.value.cols(); ++j) t.value(i, j) = r.number();
    net.params.push_back(std::move(t));
  }
  r.expect("end");
  try {
    check_shapes(net);
  } catch (const PreconditionError& e) {
    throw InputError(std::string("checkpoint: ") + e.what());
  }
  return net;
}

}  // namespace sentilab::neural
