#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "properties.hpp"
#include "sentilab/classifiers/model.hpp"

using namespace sentilab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using S = Sentiment;

namespace {

DocumentVector vec(std::vector<SparseEntry> e) { return DocumentVector::from_entries(std::move(e)); }
DocumentVector unit(std::uint32_t i, double w = 1.0) { return vec({{i, w}}); }

// Vocabulary app=0, bad=1, good=2; TF counts.
std::vector<Example> nb_corpus() {
  return {{vec({{2, 2.0}}), S::Positive}, {vec({{0, 1.0}, {2, 1.0}}), S::Positive}, {vec({{0, 1.0}, {1, 1.0}}), S::Negative}};
}

std::size_t position(const NaiveBayesModel& m, S s) {
  return static_cast<std::size_t>(std::find(m.classes.begin(), m.classes.end(), s) - m.classes.begin());
}

}  // namespace

TEST_CASE("naive Bayes hand-computed parameters") {
  const auto data = nb_corpus();
  const auto m = train_nb(data, 3, 1.0);
  REQUIRE(m.classes == std::vector<S>{S::Positive, S::Negative});
  const auto pos = position(m, S::Positive), neg = position(m, S::Negative);
  CHECK_THAT(std::exp(m.term_log_likelihoods[pos][2]), WithinAbs(4.0 / 7.0, 1e-12));
  CHECK_THAT(std::exp(m.term_log_likelihoods[neg][1]), WithinAbs(2.0 / 5.0, 1e-12));
  CHECK_THAT(std::exp(m.class_log_priors[pos]), WithinAbs(2.0 / 3.0, 1e-12));

  const auto p = predict_nb(m, vec({{1, 1.0}, {2, 1.0}}));
  CHECK(p.label == S::Positive);
  CHECK_THAT(std::exp(p.log_scores[pos]), WithinRel(2.0 / 3.0 * 4.0 / 7.0 * 1.0 / 7.0, 1e-12));
  CHECK_THAT(std::exp(p.log_scores[neg]), WithinRel(1.0 / 3.0 * 1.0 / 5.0 * 2.0 / 5.0, 1e-12));

  CHECK(predict_nb(m, DocumentVector{}).label == S::Positive);
}

TEST_CASE("naive Bayes degenerate cases") {
  const std::vector<Example> single{{unit(0), S::Negative}, {unit(1), S::Negative}};
  const auto m = train_nb(single, 3);
  CHECK(m.classes == std::vector<S>{S::Negative});
  CHECK(predict_nb(m, unit(2)).label == S::Negative);

  // Identical likelihoods and priors: the tie goes to Positive.
  const std::vector<Example> sym{{unit(0), S::Positive}, {unit(0), S::Negative}};
  CHECK(predict_nb(train_nb(sym, 2), unit(0)).label == S::Positive);

  const auto big = train_nb(nb_corpus(), 3, 1e12);
  for (const auto& row : big.term_log_likelihoods)
    for (double ll : row) CHECK_THAT(std::exp(ll), WithinAbs(1.0 / 3.0, 1e-9));
  CHECK_THROWS_AS(train_nb(std::vector<Example>{}, 3), PreconditionError);
}

TEST_CASE("naive Bayes likelihoods normalize and argmax ignores constant shifts") {
  Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    const std::size_t dim = 2 + rng.below(10);
    const auto data = testing::random_examples(rng, 3 + rng.below(20), dim, rng.uniform() < 0.5);
    const auto m = train_nb(data, dim, 0.1 + rng.uniform());
    for (const auto& row : m.term_log_likelihoods) {
      double sum = 0.0;
      for (double ll : row) sum += std::exp(ll);
      CHECK_THAT(sum, WithinAbs(1.0, 1e-9));
    }
    const auto probe = testing::random_examples(rng, 1, dim)[0].x;
    auto shifted = m;
    const double c = rng.uniform(-50.0, 50.0);
    for (auto& lp : shifted.class_log_priors) lp += c;
    CHECK(predict_nb(shifted, probe).label == predict_nb(m, probe).label);
  }
}

TEST_CASE("linear model prediction rules") {
  LinearModel zero;
  zero.weights.assign(5, 0.0);
  CHECK(predict_linear(zero, unit(1, 3.0)).label == S::Positive);
  CHECK(predict_linear(zero, unit(1, 3.0)).margin == 0.0);

  LinearModel m;
  m.weights.assign(5, 0.0);
  m.weights[3] = 2.0;
  const auto p = predict_linear(m, unit(3, 1.5));
  CHECK(p.margin == 3.0);
  CHECK(p.label == S::Positive);

  LinearModel n;
  n.weights = {-1.0};
  CHECK(predict_linear(n, unit(0, 2.0)).label == S::Negative);
}

TEST_CASE("linear training on a separable pair") {
  const std::vector<Example> data{{unit(0), S::Positive}, {unit(1), S::Negative}};
  for (auto kind : {LinearKind::Logistic, LinearKind::HingeSvm}) {
    const auto m = train_linear(data, 2, LinearParams{kind, 20, 0.1, 0.0, 5});
    CHECK(predict_linear(m, data[0].x).label == S::Positive);
    CHECK(predict_linear(m, data[1].x).label == S::Negative);
    CHECK_THROWS_AS(train_linear(data, 2, LinearParams{kind, 0, 0.1, 0.0, 5}), PreconditionError);
  }
  const std::vector<Example> three{{unit(0), S::Positive}, {unit(1), S::Neutral}};
  CHECK_THROWS_AS(train_linear(three, 2, LinearParams{}), PreconditionError);
}

TEST_CASE("log-loss gradient at zero") {
  const std::vector<Example> one{{unit(0), S::Positive}};
  LinearModel m;
  m.weights.assign(3, 0.0);
  const auto g = linear_gradient(m, SampleView(one), positive_vs_negative());
  CHECK_THAT(g.weights[0], WithinAbs(-0.5, 1e-15));
  CHECK(g.weights[1] == 0.0);
  CHECK_THAT(g.bias, WithinAbs(-0.5, 1e-15));
}

TEST_CASE("linear gradients match central differences") {
  for (auto kind : {LinearKind::Logistic, LinearKind::HingeSvm}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto c = testing::linear_gradient_check(kind, seed);
      INFO(to_string(kind) << " seed " << seed << " worst " << c.worst);
      CHECK(c.checked == 7);
      CHECK(c.max_relative_error < 1e-6);
    }
  }
}

TEST_CASE("linear loss is finite and L2 shrinks the weights") {
  Rng rng(41);
  for (int i = 0; i < 100; ++i) {
    const std::size_t dim = 2 + rng.below(8);
    const auto data = testing::random_examples(rng, 4 + rng.below(20), dim);
    const auto kind = rng.uniform() < 0.5 ? LinearKind::Logistic : LinearKind::HingeSvm;
    const std::uint64_t seed = rng.next_u64();
    const auto free = train_linear(data, dim, LinearParams{kind, 10, 0.1, 0.0, seed});
    const auto reg = train_linear(data, dim, LinearParams{kind, 10, 0.1, 0.5, seed});
    for (double l : reg.loss_trajectory) CHECK(std::isfinite(l));
    const auto norm = [](const LinearModel& m) { return std::inner_product(m.weights.begin(), m.weights.end(), m.weights.begin(), 0.0); };
    CHECK(norm(reg) <= norm(free));
  }
}

TEST_CASE("KNN rules") {
  const std::vector<Example> data{{unit(0), S::Negative}, {unit(1), S::Positive}, {unit(2), S::Neutral}};
  CHECK(train_knn(SampleView(data), 1).predict(unit(1)) == S::Positive);
  CHECK(train_knn(SampleView(data), 1).predict(unit(2, 4.0)) == S::Neutral);

  // Zero query: the lowest-index stored vectors fill the k slots.
  CHECK(train_knn(SampleView(data), 1).predict(DocumentVector{}) == S::Negative);

  const std::vector<Example> eq{{unit(0), S::Positive}, {unit(0), S::Positive}, {unit(0), S::Negative}};
  CHECK(train_knn(SampleView(eq), 3).predict(unit(0)) == S::Positive);
}

TEST_CASE("KNN with k = |data| predicts the global majority") {
  Rng rng(51);
  for (int i = 0; i < 300; ++i) {
    const std::size_t dim = 2 + rng.below(6);
    const auto data = testing::random_examples(rng, 1 + rng.below(15), dim, rng.uniform() < 0.5);
    const SampleView view(data);
    const auto expected = majority(view.class_counts());
    const auto knn = train_knn(view, data.size());
    for (const auto& q : testing::random_examples(rng, 5, dim)) CHECK(knn.predict(q.x) == expected);
  }
}

TEST_CASE("gini values") {
  CHECK(gini({2, 2, 0}) == 0.5);
  CHECK(gini({2, 0, 0}) == 0.0);
  CHECK(split_gini({2, 0, 0}, {0, 2, 0}) == 0.0);
}

TEST_CASE("random forest on pure data is a single leaf") {
  const std::vector<Example> data{{unit(0), S::Negative}, {unit(1), S::Negative}};
  RandomForestParams p;
  p.n_trees = 1;
  p.bootstrap = false;
  const auto m = train_rf(SampleView(data), 2, p);
  REQUIRE(m.trees.size() == 1);
  CHECK(m.trees[0].nodes.size() == 1);
  CHECK(m.predict(unit(0)) == S::Negative);
  CHECK(m.predict(DocumentVector{}) == S::Negative);
}

TEST_CASE("random forest separates a clean split") {
  const std::vector<Example> data{{unit(0), S::Positive}, {unit(0, 2.0), S::Positive}, {unit(1), S::Negative},
                                  {unit(1, 3.0), S::Negative}};
  RandomForestParams p;
  p.n_trees = 1;
  p.bootstrap = false;
  p.feature_subsample = 2;
  const auto m = train_rf(SampleView(data), 2, p);
  for (const auto& ex : data) CHECK(m.predict(ex.x) == ex.y);
}

TEST_CASE("bagging rules") {
  const auto data = nb_corpus();
  ClassifierParams p;
  CHECK_THROWS_AS(train_bagged(ModelKind::KNN, SampleView(data), 3, p, 3, 1), PreconditionError);
  CHECK_THROWS_AS(train_bagged(ModelKind::NB, SampleView(data), 3, p, 2, 1), PreconditionError);

  // One member equals the base learner on the same resample.
  const auto bag = train_bagged(ModelKind::NB, SampleView(data), 3, p, 1, 9);
  Rng rng(9);
  const auto sample = SampleView::bootstrap(SampleView(data), rng);
  const TrainedModel single{train_nb(sample, 3, p.nb_alpha)};
  Rng probe_rng(10);
  for (const auto& ex : testing::random_examples(probe_rng, 30, 3)) CHECK(predict(bag, ex.x) == predict(single, ex.x));

  CHECK(majority({2, 1, 0}) == S::Positive);
  CHECK(majority({0, 3, 0}) == S::Negative);
}

TEST_CASE("ensembles are seed-reproducible (1000 cases each)") {
  for (auto kind : {ModelKind::RF, ModelKind::LRBagged, ModelKind::NBBagged}) {
    const auto r = testing::ensemble_reproducibility(kind, 1000, 61);
    INFO(to_string(kind) << ": " << r.first_failure);
    CHECK(r.cases == 1000);
    CHECK(r.ok());
  }
}

TEST_CASE("one-vs-rest") {
  // Three disjoint unit vectors, one per class.
  const std::vector<Example> data{{unit(0), S::Positive}, {unit(1), S::Negative}, {unit(2), S::Neutral}};
  const auto m = one_vs_rest_train(SampleView(data), 3, LinearParams{LinearKind::Logistic, 50, 0.5, 0.0, 3});
  for (const auto& ex : data) CHECK(m.predict(ex.x).label == ex.y);

  OneVsRestModel flat;
  flat.classes = {S::Positive, S::Negative, S::Neutral};
  flat.members.assign(3, LinearModel{{0.0}, 0.0, LinearKind::Logistic, 0.0, {}});
  CHECK(flat.predict(unit(0)).label == S::Positive);

  Rng rng(71);
  for (int i = 0; i < 100; ++i) {
    const std::size_t dim = 2 + rng.below(6);
    const auto two = testing::random_examples(rng, 4 + rng.below(10), dim);
    for (auto kind : {LinearKind::Logistic, LinearKind::HingeSvm}) {
      const LinearParams lp{kind, 5, 0.1, 1e-4, rng.next_u64()};
      const auto ovr = one_vs_rest_train(SampleView(two), dim, lp);
      const auto bin = train_linear(two, dim, lp);
      for (const auto& q : testing::random_examples(rng, 5, dim)) CHECK(ovr.predict(q.x).label == predict_linear(bin, q.x).label);
    }
  }
}

TEST_CASE("every model kind saves and reloads to the same predictions") {
  Rng rng(81);
  const auto data = testing::random_examples(rng, 30, 6, true);
  const auto probe = testing::random_examples(rng, 20, 6);
  ClassifierParams p;
  p.rf_trees = 7;
  p.bagging_members = 3;
  for (auto kind : kAllModelKinds) {
    const auto m = train_model(kind, SampleView(data), 6, p, 99);
    const auto text = save_model(m, ModelHeader{kind, "abc", p.to_json()});
    const auto loaded = load_model(text, "abc");
    CHECK(loaded.header.kind == kind);
    CHECK(testing::same_predictions(m, loaded.model, probe));
    CHECK(save_model(loaded.model, loaded.header) == text);
    CHECK_THROWS_AS(load_model(text, "other"), InputError);
  }
  CHECK_THROWS_AS(load_model("garbage"), InputError);
}

TEST_CASE("params json round-trip") {
  ClassifierParams p;
  p.knn_k = 7;
  p.bagging_members = 11;
  const auto back = ClassifierParams::from_json(nlohmann::json::parse(p.to_json().dump()));
  CHECK(back.knn_k == 7);
  CHECK(back.bagging_members == 11);
}
