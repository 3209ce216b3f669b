#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <map>

#include "sentilab/util/csv.hpp"
#include "sentilab/util/io.hpp"

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using namespace sentilab;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(SENTILAB_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(SENTILAB_TEST_DATA) + "/" + name; }

// Fresh scratch directory per test.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("sentilab_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string str(const std::string& sub = {}) const { return (sub.empty() ? dir : dir / sub).string(); }
};

std::map<std::string, std::string> snapshot(const fs::path& dir, bool skip_manifests = false) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).string();
    if (skip_manifests && rel.rfind("manifest_", 0) == 0) continue;
    files[rel] = read_file(e.path());
  }
  return files;
}

std::string ingest_args(const std::string& out) {
  return "ingest --apps " + data("apps_small.csv") + " --reviews " + data("reviews_small.csv") + " --sar " +
         data("sar_small.csv") + " --out " + out;
}

std::size_t data_rows(const std::string& csv_text) {
  std::size_t n = 0;
  for (const auto& row : csv::parse(csv_text))
    if (!row.fields.empty() && !row.fields[0].empty() && row.fields[0][0] != '#') ++n;
  return n - 1;  // header
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run("").code == 1);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("grid --jobs 0").code == 1);
}

TEST_CASE("ingest writes the report and is byte-identical on rerun") {
  Scratch s("ingest");
  REQUIRE(run(ingest_args(s.str())).code == 0);
  for (const char* f : {"apps.csv", "survey.csv", "corpus.json", "ingest_report.json", "manifest_ingest.json"})
    CHECK(fs::exists(s.dir / f));
  const auto report = nlohmann::json::parse(read_file(s.dir / "ingest_report.json"));
  CHECK(report["apps"]["rows_read"] == 11);
  CHECK(report["apps"]["rows_dropped"] == 1);

  const auto first = snapshot(s.dir, true);
  REQUIRE(run(ingest_args(s.str())).code == 0);
  CHECK(snapshot(s.dir, true) == first);

  // Every output carries the manifest digest.
  const auto manifest = nlohmann::json::parse(read_file(s.dir / "manifest_ingest.json"));
  const std::string digest = manifest["digest"];
  CHECK(read_file(s.dir / "apps.csv").rfind("# manifest: " + digest, 0) == 0);
  CHECK(nlohmann::json::parse(read_file(s.dir / "corpus.json"))["manifest"] == digest);
}

TEST_CASE("missing input exits 2 and writes nothing") {
  Scratch s("missing");
  CHECK(run("ingest --apps " + data("nope.csv") + " --out " + s.str("out")).code == 2);
  CHECK((!fs::exists(s.dir / "out") || fs::is_empty(s.dir / "out")));
  CHECK(run("grid --out " + s.str("out")).code == 2);
}

TEST_CASE("grid cardinality and determinism") {
  Scratch s("grid");
  REQUIRE(run(ingest_args(s.str())).code == 0);

  REQUIRE(run("grid --configs Unigram+TF --models NB --out " + s.str()).code == 0);
  CHECK(data_rows(read_file(s.dir / "grid.csv")) == 1);

  REQUIRE(run("grid --jobs 2 --out " + s.str()).code == 0);
  const auto full = read_file(s.dir / "grid.csv");
  CHECK(data_rows(full) == 63);
  REQUIRE(run("grid --jobs 1 --out " + s.str()).code == 0);
  CHECK(read_file(s.dir / "grid.csv") == full);
  REQUIRE(run("grid --jobs 1 --seed 7 --out " + s.str()).code == 0);
  CHECK(read_file(s.dir / "grid.csv") != full);

  REQUIRE(run("report --out " + s.str()).code == 0);
  CHECK(fs::exists(s.dir / "report.md"));
  CHECK(fs::exists(s.dir / "report_test_accuracy.csv"));
}

TEST_CASE("nn writes one history per architecture, deterministically") {
  Scratch s("nn");
  REQUIRE(run(ingest_args(s.str())).code == 0);
  const std::string nn = "nn --arch all --epochs 1 --max-len 12 --hidden 4 --embed-dim 4 --out " + s.str();
  REQUIRE(run(nn).code == 0);
  for (const char* a : {"RNN", "LSTM", "CNN"}) {
    const auto h = read_file(s.dir / (std::string("history_") + a + ".csv"));
    CHECK(data_rows(h) == 1);
  }
  const auto first = snapshot(s.dir, true);
  REQUIRE(run(nn).code == 0);
  CHECK(snapshot(s.dir, true) == first);

  REQUIRE(run("nn --arch LSTM --epochs 2 --max-len 12 --hidden 4 --glove " + data("glove_small.txt") + " --out " +
              s.str()).code == 0);
  CHECK(data_rows(read_file(s.dir / "history_LSTM.csv")) == 2);
  CHECK(run("nn --arch GRU --out " + s.str()).code == 1);
}

TEST_CASE("eda bundle") {
  Scratch s("eda");
  REQUIRE(run(ingest_args(s.str())).code == 0);
  REQUIRE(run("eda --out " + s.str()).code == 0);
  std::size_t rq_files = 0;
  for (const auto& e : fs::directory_iterator(s.dir)) rq_files += e.path().filename().string().rfind("rq", 0) == 0;
  CHECK(rq_files == 8);
  const auto summary = nlohmann::json::parse(read_file(s.dir / "eda_summary.json"));
  for (const char* rq : {"rq1", "rq2", "rq3", "rq4", "rq5", "rq6", "rq7", "rq8"}) CHECK(summary[rq]["status"] == "ok");
  const auto first = snapshot(s.dir, true);
  REQUIRE(run("eda --out " + s.str()).code == 0);
  CHECK(snapshot(s.dir, true) == first);

  Scratch only("eda_apps");
  REQUIRE(run("ingest --apps " + data("apps_small.csv") + " --out " + only.str()).code == 0);
  REQUIRE(run("eda --out " + only.str()).code == 0);
  const auto partial = nlohmann::json::parse(read_file(only.dir / "eda_summary.json"));
  CHECK(partial["rq1"]["status"] == "ok");
  CHECK(partial["rq6"]["status"] == "skipped");
}

TEST_CASE("score with the lexicon") {
  auto r = run("score --text 'great app'");
  CHECK(r.code == 0);
  CHECK(r.out == "Positive\t0.8\t0.75\n");

  r = run("score --text ''");
  CHECK(r.code == 0);
  CHECK(r.out.empty());

  r = run("score --text 'not a very great app' --text 'meh'");
  CHECK(r.out.rfind("Negative\t-0.3076", 0) == 0);
  CHECK(r.out.find("\nNeutral\t0\t0\n") != std::string::npos);
}

TEST_CASE("score with saved models checks the vocabulary") {
  Scratch s("score");
  REQUIRE(run(ingest_args(s.str())).code == 0);
  REQUIRE(run("grid --configs Unigram+TF,Bigram+TF --models NB --save-models --out " + s.str()).code == 0);
  const std::string m1 = s.str("models/Unigram_TF__NB.model"), v1 = s.str("models/Unigram_TF.vocab");
  const std::string v2 = s.str("models/Bigram_TF.vocab");
  REQUIRE(fs::exists(m1));

  auto ok = run("score --model " + m1 + " --vocab " + v1 + " --text 'really good app' --text 'crash'");
  CHECK(ok.code == 0);
  CHECK(std::count(ok.out.begin(), ok.out.end(), '\n') == 2);

  auto bad = run("score --model " + m1 + " --vocab " + v2 + " --text 'really good app'");
  CHECK(bad.code == 2);
  CHECK(bad.out.empty());

  REQUIRE(run("nn --arch CNN --epochs 1 --max-len 8 --hidden 3 --embed-dim 3 --out " + s.str()).code == 0);
  auto nn_ok = run("score --model " + s.str("checkpoint_CNN.model") + " --vocab " + s.str("nn_vocab.txt") + " --text 'good'");
  CHECK(nn_ok.code == 0);
  CHECK(std::count(nn_ok.out.begin(), nn_ok.out.end(), '\n') == 1);
  auto nn_bad = run("score --model " + s.str("checkpoint_CNN.model") + " --vocab " + v1 + " --text 'good'");
  CHECK(nn_bad.code == 2);
  CHECK(nn_bad.out.empty());
}

TEST_CASE("config file overrides defaults and flags override the config") {
  Scratch s("config");
  REQUIRE(run(ingest_args(s.str())).code == 0);
  write_file_atomic(s.dir / "cfg.json", R"({"seed": 7, "grid": {"configs": ["Unigram+TP"], "models": ["SVM", "NB"]}})");
  REQUIRE(run("--config " + s.str("cfg.json") + " grid --out " + s.str()).code == 0);
  const auto g = read_file(s.dir / "grid.csv");
  CHECK(data_rows(g) == 2);
  REQUIRE(run("--config " + s.str("cfg.json") + " grid --models KNN --out " + s.str()).code == 0);
  CHECK(data_rows(read_file(s.dir / "grid.csv")) == 1);
  const auto manifest = nlohmann::json::parse(read_file(s.dir / "manifest_grid.json"));
  CHECK(manifest["seed"] == 7);
}
