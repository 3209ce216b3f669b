#pragma once
// End-to-end experiment drivers: the seeded stratified split, the
// (feature config x model) grid, and single neural runs. The CLI and the
// acceptance checks both go through these.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sentilab/classifiers/model.hpp"
#include "sentilab/corpus.hpp"
#include "sentilab/features.hpp"
#include "sentilab/metrics.hpp"
#include "sentilab/neural/embedding.hpp"
#include "sentilab/neural/train.hpp"
#include "sentilab/textprep.hpp"

namespace sentilab {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Per class, a seeded shuffle puts round(fraction * n_class) rows in
// validation. Both index lists come back in ascending order.
inline SplitIndices stratified_split(std::span<const Sentiment> labels, double validation_fraction, std::uint64_t seed) {
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw PreconditionError("stratified_split: fraction must be in [0, 1)");
  }
  SplitIndices out;
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (index_of(labels[i]) == c) rows.push_back(i);
    Rng rng = Rng::derive(seed, {0x73706c6974ULL, c});
    rng.shuffle(std::span<std::size_t>(rows));
    const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(rows.size())));
    out.validation.insert(out.validation.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_val));
    out.train.insert(out.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_val), rows.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  return out;
}

// Runs `fn(i)` for i in [0, n) on up to `jobs` threads. Exceptions must be
// handled inside fn.
inline void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct GridSpec {
  std::vector<FeatureConfig> configs = all_feature_configs();
  std::vector<ModelKind> models{kAllModelKinds.begin(), kAllModelKinds.end()};
  double validation_fraction = 0.2;
  bool include_neutral = true;
  std::uint64_t seed = 42;
  ClassifierParams params;
  PipelineConfig pipeline;
  std::size_t jobs = 1;
};

struct GridCell {
  std::string config_tag;
  ModelKind model = ModelKind::NB;
  std::uint64_t seed = 0;
  std::optional<EvaluationReport> validation;
  std::optional<EvaluationReport> test;
  std::string error;
};

struct GridData {
  std::vector<TokenList> train_tokens;
  std::vector<Sentiment> train_labels;
  std::vector<TokenList> val_tokens;
  std::vector<Sentiment> val_labels;
  std::vector<TokenList> test_tokens;
  std::vector<Sentiment> test_labels;
  std::size_t neutral_excluded = 0;
};

// Google documents are split train/validation; survey documents form the test set.
inline GridData prepare_grid_data(const std::vector<LabeledDocument>& docs, const PipelineConfig& pipeline,
                                  double validation_fraction, bool include_neutral, std::uint64_t seed) {
  GridData g;
  std::vector<TokenList> google_tokens;
  std::vector<Sentiment> google_labels;
  for (const auto& d : docs) {
    if (!include_neutral && d.label == Sentiment::Neutral) {
      ++g.neutral_excluded;
      continue;
    }
    if (d.source == DocumentSource::SarTest) {
      g.test_tokens.push_back(preprocess(d.text, pipeline));
      g.test_labels.push_back(d.label);
    } else {
      google_tokens.push_back(preprocess(d.text, pipeline));
      google_labels.push_back(d.label);
    }
  }
  const auto split = stratified_split(google_labels, validation_fraction, seed);
  for (auto i : split.train) {
    g.train_tokens.push_back(std::move(google_tokens[i]));
    g.train_labels.push_back(google_labels[i]);
  }
  for (auto i : split.validation) {
    g.val_tokens.push_back(std::move(google_tokens[i]));
    g.val_labels.push_back(google_labels[i]);
  }
  return g;
}

inline std::size_t canonical_config_index(const FeatureConfig& c) {
  const auto all = all_feature_configs();
  for (std::size_t i = 0; i < all.size(); ++i)
    if (all[i].ngram_order == c.ngram_order && all[i].scheme == c.scheme) return i;
  return all.size();
}

inline std::size_t canonical_model_index(ModelKind k) {
  for (std::size_t i = 0; i < kAllModelKinds.size(); ++i)
    if (kAllModelKinds[i] == k) return i;
  return kAllModelKinds.size();
}

// Seed of the (config, model) cell. Indices are positions in the full
// 9 x 7 grid, so a cell gets the same seed in any sub-grid.
inline std::uint64_t cell_seed(std::uint64_t master, const FeatureConfig& c, ModelKind k) {
  return Rng::derive_seed(master, {canonical_config_index(c), canonical_model_index(k)});
}

using ModelSink = std::function<void(const FeatureConfig&, ModelKind, const TrainedModel&, const Vocabulary&)>;

inline std::vector<Example> to_examples(std::span<const TokenList> tokens, std::span<const Sentiment> labels,
                                        const Vocabulary& vocab, WeightScheme scheme) {
  std::vector<Example> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) out.push_back({vectorize(tokens[i], vocab, scheme), labels[i]});
  return out;
}

// One cell per (config, model) in the order the GridSpec lists them. A failing cell records its
// error and the grid moves on.
inline std::vector<GridCell> run_grid(const GridData& data, const GridSpec& spec, const ModelSink& sink = {}) {
  if (spec.configs.empty() || spec.models.empty()) throw PreconditionError("grid needs at least one config and one model");
  std::vector<GridCell> cells;
  std::mutex sink_mutex;
  for (const auto& cfg : spec.configs) {
    const std::size_t base = cells.size();
    for (auto k : spec.models) {
      GridCell c;
      c.config_tag = cfg.tag();
      c.model = k;
      c.seed = cell_seed(spec.seed, cfg, k);
      cells.push_back(std::move(c));
    }
    std::optional<Vocabulary> vocab;
    std::vector<Example> train, val, test;
    std::string prep_error;
    try {
      vocab = build_vocabulary(data.train_tokens, cfg);
      train = to_examples(data.train_tokens, data.train_labels, *vocab, cfg.scheme);
      val = to_examples(data.val_tokens, data.val_labels, *vocab, cfg.scheme);
      test = to_examples(data.test_tokens, data.test_labels, *vocab, cfg.scheme);
    } catch (const std::exception& e) {
      prep_error = e.what();
    }
    parallel_for(spec.models.size(), spec.jobs, [&](std::size_t m) {
      GridCell& cell = cells[base + m];
      if (!prep_error.empty()) {
        cell.error = prep_error;
        return;
      }
      try {
        const SampleView view(train);
        const auto model = train_model(cell.model, view, vocab->size(), spec.params, cell.seed);
        const auto score = [&](const std::vector<Example>& set) -> std::optional<EvaluationReport> {
          if (set.empty()) return std::nullopt;
          std::vector<Sentiment> actual, predicted;
          for (const auto& ex : set) {
            actual.push_back(ex.y);
            predicted.push_back(predict(model, ex.x));
          }
          return evaluate(actual, predicted, cell.config_tag);
        };
        cell.validation = score(val);
        cell.test = score(test);
        if (sink) {
          std::lock_guard lock(sink_mutex);
          sink(cfg, cell.model, model, *vocab);
        }
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    });
  }
  return cells;
}

inline std::string grid_csv(const std::vector<GridCell>& cells) {
  std::string out = csv::format_row({"config", "model", "seed", "val_n", "val_accuracy", "val_positive_f",
                                     "val_macro_f", "test_n", "test_accuracy", "test_positive_f", "test_macro_f",
                                     "error"});
  const auto fields = [](const std::optional<EvaluationReport>& r, std::vector<std::string>& row) {
    if (!r) {
      row.insert(row.end(), 4, std::string());
      return;
    }
    row.push_back(std::to_string(r->confusion.total()));
    row.push_back(format_fixed(r->accuracy, 6));
    row.push_back(format_fixed(r->positive_f, 6));
    row.push_back(format_fixed(r->macro_f, 6));
  };
  for (const auto& c : cells) {
    std::vector<std::string> row{c.config_tag, std::string(to_string(c.model)), std::to_string(c.seed)};
    fields(c.validation, row);
    fields(c.test, row);
    row.push_back(c.error);
    out += csv::format_row(row);
  }
  return out;
}

// ---- neural runs ----

struct NeuralRunSpec {
  neural::NeuralConfig config;
  PipelineConfig pipeline;
  double validation_fraction = 0.2;
  std::uint64_t split_seed = 42;
  std::size_t min_df = 1;
  const neural::EmbeddingTable* glove = nullptr;  // random embeddings when null
};

struct NeuralRunResult {
  neural::NeuralNet net;
  neural::TrainingHistory history;
  Vocabulary vocab;
  EvaluationReport validation;
  std::optional<EvaluationReport> test;
  std::size_t neutral_excluded = 0;
  std::size_t embedding_hits = 0;  // vocabulary words found in the GloVe table
};

inline NeuralRunResult run_neural(const std::vector<LabeledDocument>& docs, NeuralRunSpec spec) {
  const GridData data = prepare_grid_data(docs, spec.pipeline, spec.validation_fraction, false, spec.split_seed);
  if (data.train_tokens.empty()) throw PreconditionError("neural run: no binary-labeled training documents");
  NeuralRunResult out;
  out.neutral_excluded = data.neutral_excluded;
  out.vocab = build_vocabulary(data.train_tokens, FeatureConfig(1, WeightScheme::TF, spec.min_df));
  Eigen::MatrixXd embedding;
  if (spec.glove) {
    embedding = neural::build_embedding_matrix(out.vocab, *spec.glove, spec.config.seed);
    spec.config.embed_dim = spec.glove->dimension;
    for (const auto& t : out.vocab.terms()) out.embedding_hits += spec.glove->find(t) != nullptr;
  } else {
    embedding = neural::random_embedding_matrix(out.vocab, spec.config.embed_dim, spec.config.seed);
  }
  const auto& cfg = spec.config;
  const auto train = neural::encode_sequences(data.train_tokens, data.train_labels, out.vocab, cfg.max_len);
  const auto val = neural::encode_sequences(data.val_tokens, data.val_labels, out.vocab, cfg.max_len);
  auto trained = neural::train(neural::initialize(cfg, std::move(embedding)), train, val);
  out.net = std::move(trained.net);
  out.history = std::move(trained.history);
  const std::string tag(neural::to_string(cfg.arch));
  const auto& val_set = val.rows() ? val : train;
  out.validation = evaluate(val_set.labels, neural::predict(out.net, val_set), tag);
  if (!data.test_tokens.empty()) {
    const auto test = neural::encode_sequences(data.test_tokens, data.test_labels, out.vocab, cfg.max_len);
    out.test = evaluate(test.labels, neural::predict(out.net, test), tag);
  }
  return out;
}

}  // namespace sentilab
