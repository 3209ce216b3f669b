#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "properties.hpp"
#include "sentilab/neural/embedding.hpp"
#include "sentilab/neural/train.hpp"
#include "sentilab/util/io.hpp"

using namespace sentilab;
using namespace sentilab::neural;
using Catch::Matchers::WithinAbs;
using S = Sentiment;

namespace {

Vocabulary vocab_of(std::vector<TokenList> docs) { return build_vocabulary(docs, FeatureConfig(1, WeightScheme::TF, 1)); }

NeuralNet zero_net(Arch arch, std::size_t vocab_rows = 4, std::size_t d = 3, std::size_t hidden = 2) {
  Rng rng(1);
  auto net = testing::random_net(arch, rng, vocab_rows, d, hidden);
  for (auto& t : net.params) t.value.setZero();
  return net;
}

SequenceBatch toy_batch() {
  SequenceBatch b;
  b.max_len = 3;
  b.token_ids = {1, 2, 0, 3, 0, 0};
  b.lengths = {2, 1};
  b.labels = {S::Positive, S::Negative};
  return b;
}

double max_abs_diff(const Gradients& a, const Gradients& b) {
  double m = 0.0;
  for (std::size_t k = 1; k < a.dense.size(); ++k) m = std::max(m, (a.dense[k] - b.dense[k]).cwiseAbs().maxCoeff());
  for (const auto& [row, g] : a.embedding_rows) m = std::max(m, (g - b.embedding_rows.at(row)).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST_CASE("load_glove examples") {
  const auto t = load_glove("a 1.0 2.0\nb 0.5 -0.5\n");
  CHECK(t.dimension == 2);
  CHECK(t.vectors.size() == 2);
  CHECK(*t.find("b") == std::vector<double>{0.5, -0.5});

  try {
    load_glove("a 1.0 2.0\nb 0.5 -0.5\nc 1.0\n");
    FAIL("expected an inconsistent-dimension error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(load_glove(""), InputError);

  const auto skip = load_glove("a 1 2\nb x 2\na 3 4\n");
  CHECK(skip.vectors.size() == 1);
  CHECK(*skip.find("a") == std::vector<double>{3, 4});
  CHECK(skip.diagnostics.size() == 2);

  const auto fx = load_glove(read_file(std::string(SENTILAB_TEST_DATA) + "/glove_small.txt"));
  CHECK(fx.dimension == 4);
  CHECK(fx.vectors.size() == 4);
}

TEST_CASE("embedding matrix rules") {
  const auto table = load_glove("good 1 2\napp 3 4\n");
  const auto vocab = vocab_of({{"app", "good", "zzz"}});
  const auto m = build_embedding_matrix(vocab, table, 7);
  REQUIRE(m.rows() == 4);
  REQUIRE(m.cols() == 2);
  CHECK(m.row(0).isZero());
  CHECK(m(1 + *vocab.index_of("app"), 0) == 3.0);
  CHECK(m(1 + *vocab.index_of("good"), 1) == 2.0);
  const auto oov = 1 + *vocab.index_of("zzz");
  CHECK(m.row(oov) == build_embedding_matrix(vocab, table, 7).row(oov));
  CHECK(m.row(oov).cwiseAbs().maxCoeff() <= 0.05);
  CHECK(m.row(oov) != build_embedding_matrix(vocab, table, 8).row(oov));
}

TEST_CASE("encode_sequences padding and truncation") {
  const auto vocab = vocab_of({{"a", "b", "c", "d", "e", "f"}});
  const std::vector<TokenList> docs{{"a", "b"}, {"a", "b", "c", "d", "e", "f"}, {}};
  const std::vector<S> labels{S::Positive, S::Negative, S::Positive};
  const auto b = encode_sequences(docs, labels, vocab, 4);
  CHECK(b.rows() == 3);
  CHECK(std::vector<std::int32_t>(b.row(0).begin(), b.row(0).end()) == std::vector<std::int32_t>{1, 2, 0, 0});
  CHECK(b.lengths[0] == 2);
  CHECK(std::vector<std::int32_t>(b.row(1).begin(), b.row(1).end()) == std::vector<std::int32_t>{1, 2, 3, 4});
  CHECK(b.lengths[1] == 4);
  CHECK(std::vector<std::int32_t>(b.row(2).begin(), b.row(2).end()) == std::vector<std::int32_t>{0, 0, 0, 0});
  CHECK(b.lengths[2] == 0);
  CHECK_THROWS_AS(encode_sequences(docs, labels, vocab, 0), PreconditionError);
}

TEST_CASE("zero-parameter networks output one half") {
  for (auto arch : {Arch::RNN, Arch::LSTM, Arch::CNN}) {
    const auto net = zero_net(arch);
    const auto f = forward(net, toy_batch());
    for (Eigen::Index r = 0; r < 2; ++r) {
      CHECK(f.probabilities(r, 0) == 0.5);
      CHECK(f.probabilities(r, 1) == 0.5);
    }
    if (arch == Arch::LSTM || arch == Arch::RNN) {
      for (const auto& c : f.caches)
        for (const auto& h : c.h) CHECK(h.isZero());
    }
    if (arch == Arch::LSTM) {
      for (const auto& c : f.caches) {
        for (const auto& cell : c.c) CHECK(cell.isZero());
        for (const auto& g : c.gates) {
          const auto H = g.size() / 4;
          CHECK((g.head(3 * H).array() == 0.5).all());
          CHECK(g.tail(H).isZero());
        }
      }
    }
  }
}

TEST_CASE("zero-weight LSTM output bias gradient is mean(softmax - onehot)") {
  const auto net = zero_net(Arch::LSTM);
  const auto batch = toy_batch();
  const auto g = backward(net, forward(net, batch), batch.labels);
  // Positive row: (0.5 - 1, 0.5); Negative row: (0.5, 0.5 - 1).
  CHECK_THAT(g.dense[5](0, 0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(g.dense[5](1, 0), WithinAbs(0.0, 1e-15));

  SequenceBatch pos = batch;
  pos.labels = {S::Positive, S::Positive};
  const auto gp = backward(net, forward(net, pos), pos.labels);
  CHECK_THAT(gp.dense[5](0, 0), WithinAbs(-0.5, 1e-15));
  CHECK_THAT(gp.dense[5](1, 0), WithinAbs(0.5, 1e-15));
  CHECK(gp.dense[4].isZero());  // Wo sees h = 0
}

TEST_CASE("scalar LSTM step matches the closed form") {
  NeuralConfig cfg = NeuralConfig::defaults_for(Arch::LSTM);
  cfg.embed_dim = 1;
  cfg.hidden_units = 1;
  Eigen::MatrixXd emb(2, 1);
  emb << 0.0, 0.7;
  auto net = initialize(cfg, emb);
  net.params[1].value << 0.5, -0.3, 0.8, 1.2;   // W: i f o g
  net.params[2].value << 0.1, 0.2, -0.4, 0.6;   // U (unused at t=1, h0 = 0)
  net.params[3].value << 0.05, 0.0, -0.1, 0.2;  // b
  net.params[4].value << 1.5, -2.0;             // Wo
  net.params[5].value << 0.1, -0.1;             // bo

  const double x = 0.7;
  const auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const double i = sig(0.5 * x + 0.05);
  const double o = sig(0.8 * x - 0.1);
  const double g = std::tanh(1.2 * x + 0.2);
  const double c1 = i * g;  // f * c0 = 0
  const double h1 = o * std::tanh(c1);
  const double z0 = 1.5 * h1 + 0.1, z1 = -2.0 * h1 - 0.1;
  const double p0 = 1.0 / (1.0 + std::exp(z1 - z0));

  const std::vector<std::int32_t> ids{1};
  const auto s = forward_sample(net, ids);
  CHECK_THAT(s.c[1](0), WithinAbs(c1, 1e-12));
  CHECK_THAT(s.h[1](0), WithinAbs(h1, 1e-12));
  CHECK_THAT(s.probs(0), WithinAbs(p0, 1e-12));
}

TEST_CASE("gradients match central differences for every architecture") {
  for (auto arch : {Arch::RNN, Arch::LSTM, Arch::CNN}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto c = testing::neural_gradient_check(arch, seed);
      INFO(to_string(arch) << " seed " << seed << " worst " << c.worst << " " << c.max_relative_error);
      CHECK(c.checked > 40);
      CHECK(c.max_relative_error < 1e-4);
    }
  }
}

TEST_CASE("duplicated batch gives the same loss and mean gradient") {
  for (auto arch : {Arch::RNN, Arch::LSTM, Arch::CNN}) {
    Rng rng(123);
    const auto net = testing::random_net(arch, rng, 6, 3, 3);
    const auto batch = testing::random_batch(rng, 3, 4, 6);
    std::vector<std::size_t> twice{0, 1, 2, 0, 1, 2};
    const auto dup = batch.select(twice);
    const auto f1 = forward(net, batch);
    const auto f2 = forward(net, dup);
    CHECK_THAT(f2.loss, WithinAbs(f1.loss, 1e-14));
    CHECK(max_abs_diff(backward(net, f1, batch.labels), backward(net, f2, dup.labels)) < 1e-14);
  }
}

TEST_CASE("padding invariance (1000 cases per architecture)") {
  for (auto arch : {Arch::RNN, Arch::LSTM, Arch::CNN}) {
    const auto r = testing::padding_invariance(arch, 1000, 404);
    INFO(r.first_failure);
    CHECK(r.cases == 1000);
    CHECK(r.ok());
  }
}

TEST_CASE("softmax normalization (1000 cases per architecture)") {
  for (auto arch : {Arch::RNN, Arch::LSTM, Arch::CNN}) {
    const auto r = testing::softmax_normalization(arch, 1000, 505);
    INFO(r.first_failure);
    CHECK(r.cases == 1000);
    CHECK(r.ok());
  }
}

TEST_CASE("frozen embeddings get no gradient") {
  Rng rng(9);
  auto net = testing::random_net(Arch::RNN, rng, 6, 3, 3);
  net.config.freeze_embeddings = true;
  const auto batch = testing::random_batch(rng, 2, 4, 6, false);
  CHECK(backward(net, forward(net, batch), batch.labels).embedding_rows.empty());
}

TEST_CASE("shape errors name the tensor") {
  Rng rng(2);
  auto net = testing::random_net(Arch::LSTM, rng, 5, 3, 2);
  net.params[2].value.resize(3, 3);
  try {
    check_shapes(net);
    FAIL("expected a shape error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("U") != std::string::npos);
  }
  CHECK_THROWS_AS(label_index(S::Neutral), PreconditionError);
}

namespace {

struct ToyRun {
  NeuralNet net;
  SequenceBatch train, val;
};

ToyRun toy_run(Arch arch, std::size_t epochs, double lr, std::size_t jobs) {
  Rng rng(77);
  NeuralConfig cfg = NeuralConfig::defaults_for(arch);
  cfg.embed_dim = 4;
  cfg.hidden_units = 5;
  cfg.cnn_filters = 5;
  cfg.max_len = 6;
  cfg.epochs = epochs;
  cfg.batch_size = 7;
  cfg.learning_rate = lr;
  cfg.seed = 3;
  cfg.jobs = jobs;
  Eigen::MatrixXd emb(9, 4);
  for (Eigen::Index i = 0; i < emb.size(); ++i) emb.data()[i] = rng.uniform(-0.3, 0.3);
  emb.row(0).setZero();
  ToyRun r{initialize(cfg, emb), testing::random_batch(rng, 23, 6, 9), testing::random_batch(rng, 6, 6, 9)};
  return r;
}

}  // namespace

TEST_CASE("training is deterministic and serial equals parallel") {
  for (auto arch : {Arch::RNN, Arch::LSTM, Arch::CNN}) {
    auto a = toy_run(arch, 3, 0.1, 1);
    auto b = toy_run(arch, 3, 0.1, 1);
    auto p = toy_run(arch, 3, 0.1, 4);
    const auto ra = train(a.net, a.train, a.val);
    const auto rb = train(b.net, b.train, b.val);
    const auto rp = train(p.net, p.train, p.val);
    CHECK(ra.history.to_csv() == rb.history.to_csv());
    CHECK(ra.history.to_csv() == rp.history.to_csv());
    CHECK(save_checkpoint(ra.net, "h") == save_checkpoint(rp.net, "h"));
    CHECK(ra.history.records.size() == 3);
  }
}

TEST_CASE("zero learning rate leaves parameters and history unchanged") {
  auto r = toy_run(Arch::LSTM, 3, 0.0, 1);
  const auto before = save_checkpoint(r.net, "h");
  const auto out = train(r.net, r.train, r.val);
  CHECK(save_checkpoint(out.net, "h") == before);
  const auto& h = out.history.records;
  for (const auto& rec : h) {
    CHECK(rec.train_loss == h[0].train_loss);
    CHECK(rec.val_accuracy == h[0].val_accuracy);
  }
}

TEST_CASE("one epoch on a separable pair") {
  NeuralConfig cfg = NeuralConfig::defaults_for(Arch::RNN);
  cfg.embed_dim = 2;
  cfg.hidden_units = 2;
  cfg.epochs = 1;
  cfg.max_len = 2;
  Eigen::MatrixXd emb(3, 2);
  emb << 0, 0, 1, 0, 0, 1;
  SequenceBatch b;
  b.max_len = 2;
  b.token_ids = {1, 0, 2, 0};
  b.lengths = {1, 1};
  b.labels = {S::Positive, S::Negative};
  const auto out = train(initialize(cfg, emb), b, SequenceBatch{});
  REQUIRE(out.history.records.size() == 1);
  CHECK(std::isfinite(out.history.records[0].train_loss));
  const double acc = out.history.records[0].train_accuracy;
  CHECK((acc == 0.0 || acc == 0.5 || acc == 1.0));
}

TEST_CASE("non-finite loss aborts with the epoch index") {
  auto r = toy_run(Arch::RNN, 2, 0.1, 1);
  r.net.params[0].value(1, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    train(r.net, r.train, r.val);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch() == 1);
  }
}

TEST_CASE("checkpoint round-trip and vocabulary check") {
  for (auto arch : {Arch::RNN, Arch::LSTM, Arch::CNN}) {
    auto r = toy_run(arch, 1, 0.1, 1);
    const auto text = save_checkpoint(r.net, "abc", {{"note", "x"}});
    nlohmann::json cfg;
    const auto back = load_checkpoint(text, "abc", &cfg);
    CHECK(save_checkpoint(back, "abc", {{"note", "x"}}) == text);
    CHECK(cfg.at("note") == "x");
    CHECK(predict(back, r.val) == predict(r.net, r.val));
    CHECK_THROWS_AS(load_checkpoint(text, "zzz"), InputError);
  }
  CHECK_THROWS_AS(load_checkpoint("sentilab-model 1\nkind GRU\n"), InputError);
}

TEST_CASE("history CSV layout") {
  TrainingHistory h;
  h.records.push_back({1, 0.5, 0.75, 0.25, 1.0});
  CHECK(h.to_csv() == "epoch,train_loss,train_acc,val_loss,val_acc\n1,0.5,0.75,0.25,1\n");
}
