#pragma once
// TrainedModel: the tagged union over every classical classifier, plus the
// one-vs-rest and bagging wrappers, a uniform train/predict entry point, and
// the versioned text persistence format:
//
//   sentilab-model 1
//   kind <ModelKind>
//   vocab_hash <hex>
//   config <length> <json>
//   <body tokens>
//   end
//
// load_model rejects a file whose vocab_hash differs from the caller's.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentilab/classifiers/dataset.hpp"
#include "sentilab/classifiers/knn.hpp"
#include "sentilab/classifiers/linear.hpp"
#include "sentilab/classifiers/naive_bayes.hpp"
#include "sentilab/classifiers/random_forest.hpp"
#include "sentilab/util/error.hpp"
#include "sentilab/util/tokens.hpp"

namespace sentilab {

enum class ModelKind { SVM, KNN, LR, RF, NB, LRBagged, NBBagged };

inline constexpr std::array<ModelKind, 7> kAllModelKinds{ModelKind::SVM, ModelKind::KNN, ModelKind::LR,
                                                         ModelKind::RF,  ModelKind::NB,  ModelKind::LRBagged,
                                                         ModelKind::NBBagged};

constexpr std::string_view to_string(ModelKind k) noexcept {
  switch (k) {
    case ModelKind::SVM: return "SVM";
    case ModelKind::KNN: return "KNN";
    case ModelKind::LR: return "LR";
    case ModelKind::RF: return "RF";
    case ModelKind::NB: return "NB";
    case ModelKind::LRBagged: return "LR(Bagging)";
    case ModelKind::NBBagged: return "NB(Bagging)";
  }
  return "?";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (auto k : kAllModelKinds)
    if (to_string(k) == s) return k;
  if (s == "LR-bagged" || s == "LRBagged") return ModelKind::LRBagged;
  if (s == "NB-bagged" || s == "NBBagged") return ModelKind::NBBagged;
  return std::nullopt;
}

struct ClassifierParams {
  double nb_alpha = 1.0;
  std::size_t linear_epochs = 20;
  double linear_learning_rate = 0.1;
  double linear_lambda = 1e-4;
  std::size_t knn_k = 5;
  std::size_t rf_trees = 100;
  std::size_t rf_max_depth = 32;
  std::size_t rf_feature_subsample = 0;  // 0 = ceil(sqrt(V))
  std::size_t bagging_members = 25;

  nlohmann::ordered_json to_json() const {
    return {{"nb_alpha", nb_alpha},
            {"linear_epochs", linear_epochs},
            {"linear_learning_rate", linear_learning_rate},
            {"linear_lambda", linear_lambda},
            {"knn_k", knn_k},
            {"rf_trees", rf_trees},
            {"rf_max_depth", rf_max_depth},
            {"rf_feature_subsample", rf_feature_subsample},
            {"bagging_members", bagging_members}};
  }

  static ClassifierParams from_json(const nlohmann::json& j) { return from_json(j, ClassifierParams()); }

  static ClassifierParams from_json(const nlohmann::json& j, ClassifierParams p) {
    p.nb_alpha = j.value("nb_alpha", p.nb_alpha);
    p.linear_epochs = j.value("linear_epochs", p.linear_epochs);
    p.linear_learning_rate = j.value("linear_learning_rate", p.linear_learning_rate);
    p.linear_lambda = j.value("linear_lambda", p.linear_lambda);
    p.knn_k = j.value("knn_k", p.knn_k);
    p.rf_trees = j.value("rf_trees", p.rf_trees);
    p.rf_max_depth = j.value("rf_max_depth", p.rf_max_depth);
    p.rf_feature_subsample = j.value("rf_feature_subsample", p.rf_feature_subsample);
    p.bagging_members = j.value("bagging_members", p.bagging_members);
    return p;
  }
};

// One binary linear model per class; the highest margin wins, ties by enum order.
struct OneVsRestModel {
  std::vector<Sentiment> classes;
  std::vector<LinearModel> members;  // members[k]: classes[k] vs rest

  struct Prediction {
    Sentiment label = Sentiment::Positive;
    std::vector<double> margins;
  };

  Prediction predict(const DocumentVector& v) const {
    Prediction p;
    double best = 0.0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const double m = members[k].margin(v);
      p.margins.push_back(m);
      if (k == 0 || m > best) {
        best = m;
        p.label = classes[k];
      }
    }
    return p;
  }
};

// Every member is trained with the same SGD seed, so for two classes the
// second member is the exact negation of the first and the argmax equals the
// binary sign decision.
inline OneVsRestModel one_vs_rest_train(const SampleView& data, std::size_t dimension, const LinearParams& p) {
  const auto counts = data.class_counts();
  OneVsRestModel m;
  for (std::size_t c = 0; c < 3; ++c)
    if (counts[c] > 0) m.classes.push_back(kAllSentiments[c]);
  if (m.classes.size() < 2) throw PreconditionError("one_vs_rest_train: need at least two classes");
  for (auto cls : m.classes) {
    m.members.push_back(train_linear_signed(
        data, dimension, [cls](const Example& ex) { return ex.y == cls ? 1.0 : -1.0; }, p));
  }
  return m;
}

struct TrainedModel;

struct BaggedModel {
  ModelKind base_kind = ModelKind::NB;
  std::vector<TrainedModel> members;
  std::uint64_t seed = 0;
};

struct TrainedModel {
  std::variant<NaiveBayesModel, LinearModel, OneVsRestModel, KnnModel, RandomForestModel, BaggedModel> model;
};

inline Sentiment predict(const TrainedModel& m, const DocumentVector& v);

inline Sentiment predict(const BaggedModel& m, const DocumentVector& v) {
  std::array<std::size_t, 3> votes{};
  for (const auto& member : m.members) ++votes[index_of(predict(member, v))];
  return majority(votes);
}

inline Sentiment predict(const TrainedModel& m, const DocumentVector& v) {
  return std::visit(
      [&](const auto& model) -> Sentiment {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, NaiveBayesModel>) return predict_nb(model, v).label;
        else if constexpr (std::is_same_v<T, LinearModel>) return predict_linear(model, v).label;
        else if constexpr (std::is_same_v<T, OneVsRestModel>) return model.predict(v).label;
        else if constexpr (std::is_same_v<T, KnnModel>) return model.predict(v);
        else if constexpr (std::is_same_v<T, RandomForestModel>) return model.predict(v);
        else return predict(model, v);
      },
      m.model);
}

namespace model_detail {

inline bool has_neutral(const SampleView& data) { return data.class_counts()[index_of(Sentiment::Neutral)] > 0; }

// LR/SVM: binary model when only Positive/Negative occur, one-vs-rest otherwise.
inline TrainedModel train_linear_any(const SampleView& data, std::size_t dimension, LinearKind kind,
                                     const ClassifierParams& p, std::uint64_t seed) {
  LinearParams lp{kind, p.linear_epochs, p.linear_learning_rate, p.linear_lambda, seed};
  if (has_neutral(data)) return {one_vs_rest_train(data, dimension, lp)};
  return {train_linear(data, dimension, lp)};
}

}  // namespace model_detail

inline TrainedModel train_model(ModelKind kind, const SampleView& data, std::size_t dimension, const ClassifierParams& p,
                         std::uint64_t seed);

// Member i trains on a bootstrap resample of |data| draws from Rng(seed + i)
// and uses seed + i for its own randomness. Only LR and NB bases are allowed.
inline BaggedModel train_bagged(ModelKind base_kind, const SampleView& data, std::size_t dimension,
                                const ClassifierParams& p, std::size_t n_members, std::uint64_t seed) {
  if (base_kind != ModelKind::LR && base_kind != ModelKind::NB) {
    throw PreconditionError("train_bagged: base learner must be LR or NB, got " + std::string(to_string(base_kind)));
  }
  if (n_members < 1 || n_members % 2 == 0) throw PreconditionError("train_bagged: n_members must be odd and >= 1");
  if (data.empty()) throw PreconditionError("train_bagged: empty data");
  BaggedModel m;
  m.base_kind = base_kind;
  m.seed = seed;
  for (std::size_t i = 0; i < n_members; ++i) {
    Rng rng(seed + i);
    const SampleView sample = SampleView::bootstrap(data, rng);
    m.members.push_back(train_model(base_kind, sample, dimension, p, seed + i));
  }
  return m;
}

inline TrainedModel train_model(ModelKind kind, const SampleView& data, std::size_t dimension,
                                const ClassifierParams& p, std::uint64_t seed) {
  switch (kind) {
    case ModelKind::NB: return {train_nb(data, dimension, p.nb_alpha)};
    case ModelKind::LR: return model_detail::train_linear_any(data, dimension, LinearKind::Logistic, p, seed);
    case ModelKind::SVM: return model_detail::train_linear_any(data, dimension, LinearKind::HingeSvm, p, seed);
    case ModelKind::KNN: return {train_knn(data, p.knn_k)};
    case ModelKind::RF: {
      RandomForestParams rp;
      rp.n_trees = p.rf_trees;
      rp.max_depth = p.rf_max_depth;
      rp.feature_subsample = p.rf_feature_subsample;
      rp.seed = seed;
      return {train_rf(data, dimension, rp)};
    }
    case ModelKind::LRBagged: return {train_bagged(ModelKind::LR, data, dimension, p, p.bagging_members, seed)};
    case ModelKind::NBBagged: return {train_bagged(ModelKind::NB, data, dimension, p, p.bagging_members, seed)};
  }
  throw PreconditionError("train_model: unknown kind");
}

// ---------------------------------------------------------------------------
// Persistence

namespace model_detail {

inline void write_vector(TokenWriter& w, const DocumentVector& v) {
  w.integer(static_cast<long long>(v.entries.size()));
  for (const auto& e : v.entries) w.integer(e.index).number(e.weight);
}

inline DocumentVector read_vector(TokenReader& r) {
  const std::size_t n = r.count();
  std::vector<SparseEntry> entries(n);
  for (auto& e : entries) {
    e.index = static_cast<std::uint32_t>(r.count());
    e.weight = r.number();
  }
  return DocumentVector::from_entries(std::move(entries));
}

inline void write_linear(TokenWriter& w, const LinearModel& m) {
  w.word(to_string(m.kind)).number(m.l2_lambda).number(m.bias).integer(static_cast<long long>(m.weights.size()));
  for (double x : m.weights) w.number(x);
  w.newline();
}

inline LinearModel read_linear(TokenReader& r) {
  LinearModel m;
  const auto kind = r.word();
  if (kind == "Logistic") m.kind = LinearKind::Logistic;
  else if (kind == "HingeSvm") m.kind = LinearKind::HingeSvm;
  else throw InputError("model data: unknown linear kind " + kind);
  m.l2_lambda = r.number();
  m.bias = r.number();
  m.weights.resize(r.count());
  for (double& x : m.weights) x = r.number();
  return m;
}

inline Sentiment read_sentiment(TokenReader& r) {
  auto s = parse_sentiment(r.word());
  if (!s) throw InputError("model data: bad class label");
  return *s;
}

inline void write_body(TokenWriter& w, const TrainedModel& model) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NaiveBayesModel>) {
          w.word("nb").number(m.smoothing_alpha).integer(static_cast<long long>(m.vocab_size));
          w.integer(static_cast<long long>(m.classes.size())).newline();
          for (std::size_t k = 0; k < m.classes.size(); ++k) {
            w.word(to_string(m.classes[k])).number(m.class_log_priors[k]);
            for (double x : m.term_log_likelihoods[k]) w.number(x);
            w.newline();
          }
        } else if constexpr (std::is_same_v<T, LinearModel>) {
          w.word("linear");
          write_linear(w, m);
        } else if constexpr (std::is_same_v<T, OneVsRestModel>) {
          w.word("ovr").integer(static_cast<long long>(m.classes.size())).newline();
          for (std::size_t k = 0; k < m.classes.size(); ++k) {
            w.word(to_string(m.classes[k]));
            write_linear(w, m.members[k]);
          }
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          w.word("knn").integer(static_cast<long long>(m.k())).integer(static_cast<long long>(m.stored().size()));
          w.newline();
          for (const auto& ex : m.stored()) {
            w.word(to_string(ex.y));
            write_vector(w, ex.x);
            w.newline();
          }
        } else if constexpr (std::is_same_v<T, RandomForestModel>) {
          w.word("rf").integer(static_cast<long long>(m.feature_subsample)).word(std::to_string(m.seed));
          w.integer(static_cast<long long>(m.trees.size())).newline();
          for (const auto& tree : m.trees) {
            w.integer(static_cast<long long>(tree.nodes.size())).newline();
            for (const auto& n : tree.nodes) {
              w.integer(n.feature).number(n.threshold).integer(n.left).integer(n.right).word(to_string(n.label));
              w.newline();
            }
          }
        } else {
          w.word("bagged").word(to_string(m.base_kind)).word(std::to_string(m.seed));
          w.integer(static_cast<long long>(m.members.size())).newline();
          for (const auto& member : m.members) write_body(w, member);
        }
      },
      model.model);
}

inline TrainedModel read_body(TokenReader& r) {
  const auto tag = r.word();
  if (tag == "nb") {
    NaiveBayesModel m;
    m.smoothing_alpha = r.number();
    m.vocab_size = r.count();
    const std::size_t n = r.count();
    for (std::size_t k = 0; k < n; ++k) {
      m.classes.push_back(read_sentiment(r));
      m.class_log_priors.push_back(r.number());
      std::vector<double> ll(m.vocab_size);
      for (double& x : ll) x = r.number();
      m.term_log_likelihoods.push_back(std::move(ll));
    }
    return {std::move(m)};
  }
  if (tag == "linear") return {read_linear(r)};
  if (tag == "ovr") {
    OneVsRestModel m;
    const std::size_t n = r.count();
    for (std::size_t k = 0; k < n; ++k) {
      m.classes.push_back(read_sentiment(r));
      m.members.push_back(read_linear(r));
    }
    return {std::move(m)};
  }
  if (tag == "knn") {
    const std::size_t k = r.count();
    const std::size_t n = r.count();
    std::vector<Example> stored(n);
    for (auto& ex : stored) {
      ex.y = read_sentiment(r);
      ex.x = read_vector(r);
    }
    return {KnnModel(std::move(stored), k)};
  }
  if (tag == "rf") {
    RandomForestModel m;
    m.feature_subsample = r.count();
    if (!parse_int(r.word(), m.seed)) throw InputError("model data: bad seed");
    const std::size_t n_trees = r.count();
    for (std::size_t t = 0; t < n_trees; ++t) {
      DecisionTree tree;
      tree.nodes.resize(r.count());
      for (auto& node : tree.nodes) {
        node.feature = static_cast<std::int32_t>(r.integer());
        node.threshold = r.number();
        node.left = static_cast<std::int32_t>(r.integer());
        node.right = static_cast<std::int32_t>(r.integer());
        node.label = read_sentiment(r);
      }
      m.trees.push_back(std::move(tree));
    }
    return {std::move(m)};
  }
  if (tag == "bagged") {
    BaggedModel m;
    auto base = parse_model_kind(r.word());
    if (!base) throw InputError("model data: bad bagging base kind");
    m.base_kind = *base;
    if (!parse_int(r.word(), m.seed)) throw InputError("model data: bad seed");
    const std::size_t n = r.count();
    for (std::size_t i = 0; i < n; ++i) m.members.push_back(read_body(r));
    return {std::move(m)};
  }
  throw InputError("model data: unknown model tag '" + tag + "'");
}

}  // namespace model_detail

struct ModelHeader {
  ModelKind kind = ModelKind::NB;
  std::string vocab_hash;
  nlohmann::ordered_json config;
};

inline std::string save_model(const TrainedModel& model, const ModelHeader& header) {
  TokenWriter w;
  w.word("sentilab-model").integer(1).newline();
  w.word("kind").word(to_string(header.kind)).newline();
  w.word("vocab_hash").word(header.vocab_hash).newline();
  w.word("config").text(header.config.dump()).newline();
  model_detail::write_body(w, model);
  w.word("end").newline();
  return w.str();
}

struct LoadedModel {
  ModelHeader header;
  TrainedModel model;
};

// expected_vocab_hash empty = accept any vocabulary.
inline LoadedModel load_model(std::string_view text, std::string_view expected_vocab_hash = {}) {
  TokenReader r(text);
  r.expect("sentilab-model");
  if (r.integer() != 1) throw InputError("model data: unsupported format version");
  LoadedModel out;
  r.expect("kind");
  auto kind = parse_model_kind(r.word());
  if (!kind) throw InputError("model data: unknown kind");
  out.header.kind = *kind;
  r.expect("vocab_hash");
  out.header.vocab_hash = r.word();
  if (!expected_vocab_hash.empty() && out.header.vocab_hash != expected_vocab_hash) {
    throw InputError("model vocabulary hash " + out.header.vocab_hash + " does not match vocabulary " +
                     std::string(expected_vocab_hash));
  }
  r.expect("config");
  out.header.config = nlohmann::ordered_json::parse(r.text());
  out.model = model_detail::read_body(r);
  r.expect("end");
  return out;
}

}  // namespace sentilab
