// sentilab: command-line driver.
//
//   sentilab ingest --apps A.csv --reviews R.csv --sar S.csv
//   sentilab grid   [--configs Unigram+TP,...] [--models SVM,NB,...] [--save-models]
//   sentilab nn     --arch LSTM|RNN|CNN|all [--glove glove.100d.txt]
//   sentilab eda
//   sentilab score  --text "..." | --file F   [--model M --vocab V | --lexicon L]
//   sentilab report
//
// Global: --config cfg.json --seed N --out DIR --jobs N
// Exit codes: 0 ok, 1 usage, 2 bad input, 3 runtime failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sentilab/classifiers/model.hpp"
#include "sentilab/corpus.hpp"
#include "sentilab/eda.hpp"
#include "sentilab/features.hpp"
#include "sentilab/lexicon.hpp"
#include "sentilab/metrics.hpp"
#include "sentilab/neural/embedding.hpp"
#include "sentilab/neural/train.hpp"
#include "sentilab/pipeline.hpp"
#include "sentilab/textprep.hpp"
#include "sentilab/util/csv.hpp"
#include "sentilab/util/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;
using namespace sentilab;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kRuntime = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- configuration ----

struct Settings {
  std::uint64_t seed = 42;
  std::size_t jobs = 1;
  fs::path out = "out";

  bool remove_stopwords = true;
  bool apply_stemming = true;
  std::string stopwords_path;
  std::string substitutions_path;
  std::string lexicon_path;
  std::string label_fallback = "lexicon";

  ClassifierParams params;
  std::vector<std::string> grid_configs;
  std::vector<std::string> grid_models;
  double validation_fraction = 0.2;
  bool include_neutral = true;

  json neural = json::object();
  std::size_t neural_min_df = 1;
  bool neural_apply_stemming = false;

  std::size_t eda_top_k = 100;

  ojson snapshot() const {
    ojson j;
    j["seed"] = seed;
    j["preprocess"] = {{"remove_stopwords", remove_stopwords},
                       {"apply_stemming", apply_stemming},
                       {"stopwords", stopwords_path},
                       {"substitutions", substitutions_path}};
    j["lexicon"] = lexicon_path;
    j["label_fallback"] = label_fallback;
    j["classifiers"] = params.to_json();
    j["grid"] = {{"configs", grid_configs},
                 {"models", grid_models},
                 {"validation_fraction", validation_fraction},
                 {"include_neutral", include_neutral}};
    ojson nn = ojson::parse(neural.dump());
    nn["min_df"] = neural_min_df;
    nn["apply_stemming"] = neural_apply_stemming;
    j["neural"] = nn;
    j["eda"] = {{"top_k", eda_top_k}};
    return j;
  }
};

void apply_config_file(Settings& s, const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw InputError("config " + path.string() + ": expected a JSON object");
  try {
    s.seed = j.value("seed", s.seed);
    s.jobs = j.value("jobs", s.jobs);
    if (j.contains("out")) s.out = j.at("out").get<std::string>();
    if (j.contains("preprocess")) {
      const auto& p = j.at("preprocess");
      s.remove_stopwords = p.value("remove_stopwords", s.remove_stopwords);
      s.apply_stemming = p.value("apply_stemming", s.apply_stemming);
      s.stopwords_path = p.value("stopwords", s.stopwords_path);
      s.substitutions_path = p.value("substitutions", s.substitutions_path);
    }
    s.lexicon_path = j.value("lexicon", s.lexicon_path);
    s.label_fallback = j.value("label_fallback", s.label_fallback);
    if (j.contains("classifiers")) s.params = ClassifierParams::from_json(j.at("classifiers"), s.params);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (g.contains("configs")) s.grid_configs = g.at("configs").get<std::vector<std::string>>();
      if (g.contains("models")) s.grid_models = g.at("models").get<std::vector<std::string>>();
      s.validation_fraction = g.value("validation_fraction", s.validation_fraction);
      s.include_neutral = g.value("include_neutral", s.include_neutral);
    }
    if (j.contains("neural")) {
      s.neural = j.at("neural");
      s.neural_min_df = s.neural.value("min_df", s.neural_min_df);
      s.neural_apply_stemming = s.neural.value("apply_stemming", s.neural_apply_stemming);
    }
    if (j.contains("eda")) s.eda_top_k = j.at("eda").value("top_k", s.eda_top_k);
  } catch (const json::exception& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  if (s.label_fallback != "lexicon" && s.label_fallback != "none") {
    throw InputError("config: label_fallback must be \"lexicon\" or \"none\"");
  }
}

// ---- run context: inputs, hashes, outputs, manifest ----

std::string iso_time(std::time_t t) {
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// SOURCE_DATE_EPOCH pins the timestamps for reproducible manifests.
std::string now_iso() {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    long long v = 0;
    if (parse_int(std::string_view(epoch), v)) return iso_time(static_cast<std::time_t>(v));
  }
  return iso_time(std::time(nullptr));
}

class Run {
 public:
  Run(std::string command, std::vector<std::string> argv, const Settings& s)
      : command_(std::move(command)), argv_(std::move(argv)), settings_(s), started_(now_iso()) {}

  std::string read_input(const fs::path& path) {
    auto text = read_file(path);
    inputs_[path.string()] = digest_hex(text);
    return text;
  }

  void hash(const std::string& name, const std::string& value) { hashes_[name] = value; }

  // Digest of everything that determines the outputs.
  std::string digest() const { return digest_hex(core().dump()); }

  void add_csv(const std::string& name, std::string body) { pending_[name] = {Kind::Csv, std::move(body), {}}; }
  void add_json(const std::string& name, ojson body) { pending_[name] = {Kind::Json, {}, std::move(body)}; }
  void add_raw(const std::string& name, std::string body) { pending_[name] = {Kind::Raw, std::move(body), {}}; }
  void add_markdown(const std::string& name, std::string body) { pending_[name] = {Kind::Markdown, std::move(body), {}}; }

  // Outputs are staged in memory and stamped with the digest at commit, so an
  // input error never leaves partial outputs. Each file goes through a rename.
  void commit() {
    const fs::path dir = settings_.out;
    const std::string d = digest();
    ojson outputs = ojson::object();
    for (const auto& [name, p] : pending_) {
      std::string body;
      if (p.kind == Kind::Csv) {
        body = "# manifest: " + d + "\n" + p.text;
      } else if (p.kind == Kind::Json) {
        ojson j;
        j["manifest"] = d;
        for (const auto& [k, v] : p.json.items()) j[k] = v;
        body = j.dump(2) + "\n";
      } else if (p.kind == Kind::Markdown) {
        body = "<!-- manifest: " + d + " -->\n" + p.text;
      } else {
        body = p.text;
      }
      write_file_atomic(dir / name, body);
      outputs[name] = digest_hex(body);
    }
    ojson m = core();
    m["digest"] = d;
    // Recorded but left out of the digest: neither changes any output.
    m["argv"] = argv_;
    m["jobs"] = settings_.jobs;
    m["outputs"] = outputs;
    m["timestamps"] = {{"started", started_}, {"finished", now_iso()}};
    write_file_atomic(dir / ("manifest_" + command_ + ".json"), m.dump(2) + "\n");
  }

 private:
  ojson core() const {
    ojson j;
    j["tool"] = "sentilab";
    j["version"] = kVersion;
    j["command"] = command_;
    j["seed"] = settings_.seed;
    j["config"] = settings_.snapshot();
    j["inputs"] = inputs_;
    j["hashes"] = hashes_;
    return j;
  }

  std::string command_;
  std::vector<std::string> argv_;
  const Settings& settings_;
  std::string started_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> hashes_;
  enum class Kind { Csv, Json, Markdown, Raw };
  struct Pending {
    Kind kind = Kind::Raw;
    std::string text;
    ojson json;
  };
  std::map<std::string, Pending> pending_;
};

PipelineConfig make_pipeline(const Settings& s, Run& run, bool stemming) {
  PipelineConfig p;
  p.remove_stopwords = s.remove_stopwords;
  p.apply_stemming = stemming;
  if (!s.stopwords_path.empty()) p.stopword_list = parse_stopwords(run.read_input(s.stopwords_path));
  if (!s.substitutions_path.empty()) p.substitutions = parse_substitutions(run.read_input(s.substitutions_path));
  return p;
}

ojson pipeline_json(const Settings& s, bool stemming) {
  return {{"remove_stopwords", s.remove_stopwords},
          {"apply_stemming", stemming},
          {"stopwords", s.stopwords_path},
          {"substitutions", s.substitutions_path}};
}

PipelineConfig pipeline_from_json(const json& j) {
  PipelineConfig p;
  p.remove_stopwords = j.value("remove_stopwords", true);
  p.apply_stemming = j.value("apply_stemming", true);
  const auto stop = j.value("stopwords", std::string());
  if (!stop.empty()) p.stopword_list = parse_stopwords(read_file(stop));
  const auto subs = j.value("substitutions", std::string());
  if (!subs.empty()) p.substitutions = parse_substitutions(read_file(subs));
  return p;
}

Lexicon load_lexicon_for(const Settings& s, Run& run) {
  Lexicon lex = s.lexicon_path.empty() ? default_lexicon() : load_lexicon(run.read_input(s.lexicon_path));
  run.hash("lexicon", lex.digest);
  return lex;
}

// Strips "# ..." lines that precede a CSV header.
std::string_view skip_comments(std::string_view text) {
  while (text.starts_with("#")) {
    const auto nl = text.find('\n');
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
  }
  return text;
}

std::vector<LabeledDocument> read_corpus_store(Run& run, const fs::path& path) {
  json j;
  try {
    j = json::parse(run.read_input(path));
    return documents_from_json(j.at("documents"));
  } catch (const json::exception& e) {
    throw InputError("corpus store " + path.string() + ": " + e.what());
  }
}

std::string write_survey_csv(const std::vector<SarRecord>& survey) {
  std::string out = csv::format_row({"Department", "App", "Review", "Rating", "Type", "Category"});
  for (const auto& s : survey) {
    out += csv::format_row({s.department, s.app_name, s.review_text, std::to_string(s.rating),
                            std::string(to_string(s.app_type)), s.category});
  }
  return out;
}

std::string file_safe(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

// ---- subcommands ----

struct IngestArgs {
  std::string apps, reviews, sar;
};

int cmd_ingest(const Settings& s, const IngestArgs& a, const std::vector<std::string>& argv) {
  if (a.apps.empty() && a.reviews.empty() && a.sar.empty()) throw UsageError("ingest: give at least one of --apps, --reviews, --sar");
  Run run("ingest", argv, s);
  ojson report = ojson::object();
  std::vector<LabeledDocument> google, survey_docs;

  if (!a.apps.empty()) {
    auto parsed = parse_apps_csv(run.read_input(a.apps));
    report["apps"] = parsed.report.to_json();
    report["apps"]["records"] = parsed.records.size();
    run.add_csv("apps.csv", write_apps_csv(parsed.records));
  }
  if (!a.reviews.empty()) {
    auto parsed = parse_reviews_csv(run.read_input(a.reviews));
    report["reviews"] = parsed.report.to_json();
    const Lexicon lex = load_lexicon_for(s, run);
    TextLabeler fallback;
    if (s.label_fallback == "lexicon") {
      fallback = [&lex](std::string_view text) -> std::optional<Sentiment> { return score_raw_text(text, lex).orientation; };
    }
    LabelingReport labeling;
    auto docs = documents_from_reviews(parsed.records, fallback, &labeling);
    report["reviews"]["labeling"] = {{"from_provided", labeling.from_provided},
                                     {"from_fallback", labeling.from_fallback},
                                     {"unlabeled", labeling.unlabeled}};
    CleaningReport cleaning;
    google = clean_corpus(docs, &cleaning);
    report["reviews"]["cleaning"] = cleaning.to_json();
  }
  if (!a.sar.empty()) {
    auto parsed = parse_sar_csv(run.read_input(a.sar));
    report["sar"] = parsed.report.to_json();
    run.add_csv("survey.csv", write_survey_csv(parsed.records));
    CleaningReport cleaning;
    survey_docs = clean_corpus(documents_from_sar(parsed.records), &cleaning);
    report["sar"]["cleaning"] = cleaning.to_json();
  }
  std::vector<LabeledDocument> all = google;
  all.insert(all.end(), survey_docs.begin(), survey_docs.end());
  run.add_json("corpus.json", {{"documents", documents_to_json(all)}});
  run.add_json("ingest_report.json", report);
  run.commit();
  std::cout << "ingest: " << google.size() << " training documents, " << survey_docs.size() << " survey documents\n";
  return kOk;
}

std::vector<FeatureConfig> grid_configs(const Settings& s) {
  if (s.grid_configs.empty()) return all_feature_configs();
  std::vector<FeatureConfig> out;
  for (const auto& tag : s.grid_configs) {
    auto c = parse_feature_tag(tag);
    if (!c) throw UsageError("unknown feature config '" + tag + "'");
    out.push_back(*c);
  }
  return out;
}

std::vector<ModelKind> grid_models(const Settings& s) {
  if (s.grid_models.empty()) return {kAllModelKinds.begin(), kAllModelKinds.end()};
  std::vector<ModelKind> out;
  for (const auto& name : s.grid_models) {
    auto k = parse_model_kind(name);
    if (!k) throw UsageError("unknown model '" + name + "'");
    out.push_back(*k);
  }
  return out;
}

struct GridArgs {
  std::string corpus;
  bool save_models = false;
};

int cmd_grid(const Settings& s, const GridArgs& a, const std::vector<std::string>& argv) {
  Run run("grid", argv, s);
  GridSpec spec;
  spec.configs = grid_configs(s);
  spec.models = grid_models(s);
  spec.validation_fraction = s.validation_fraction;
  spec.include_neutral = s.include_neutral;
  spec.seed = s.seed;
  spec.params = s.params;
  spec.jobs = s.jobs;
  spec.pipeline = make_pipeline(s, run, s.apply_stemming);
  const auto docs = read_corpus_store(run, a.corpus.empty() ? s.out / "corpus.json" : fs::path(a.corpus));
  const auto data = prepare_grid_data(docs, spec.pipeline, spec.validation_fraction, spec.include_neutral, spec.seed);
  if (data.train_tokens.empty()) throw InputError("grid: corpus store has no training documents");

  std::map<std::string, std::string> models;
  ModelSink sink;
  if (a.save_models) {
    sink = [&](const FeatureConfig& cfg, ModelKind kind, const TrainedModel& m, const Vocabulary& vocab) {
      ModelHeader h{kind, vocab.hash(),
                    {{"feature", cfg.tag()}, {"min_df", cfg.min_document_frequency},
                     {"pipeline", pipeline_json(s, s.apply_stemming)}, {"params", s.params.to_json()}}};
      const std::string stem = "models/" + file_safe(cfg.tag());
      models[stem + "__" + file_safe(to_string(kind)) + ".model"] = save_model(m, h);
      models[stem + ".vocab"] = vocab.export_text();
    };
  }
  const auto cells = run_grid(data, spec, sink);
  for (const auto& [name, body] : models) {
    if (name.ends_with(".vocab")) run.hash("vocab:" + name, digest_hex(body));
    run.add_raw(name, body);
  }
  run.add_csv("grid.csv", grid_csv(cells));
  run.commit();
  std::size_t failed = 0;
  for (const auto& c : cells) failed += !c.error.empty();
  std::cout << "grid: " << cells.size() << " cells (" << failed << " failed)\n";
  return kOk;
}

struct NnArgs {
  std::string arch = "LSTM";
  std::string glove;
  std::string corpus;
  std::optional<std::size_t> epochs, max_len, batch_size, embed_dim, hidden;
  std::optional<double> lr;
};

int cmd_nn(const Settings& s, const NnArgs& a, const std::vector<std::string>& argv) {
  std::vector<neural::Arch> archs;
  if (a.arch == "all") {
    archs = {neural::Arch::RNN, neural::Arch::LSTM, neural::Arch::CNN};
  } else {
    auto arch = neural::parse_arch(a.arch);
    if (!arch) throw UsageError("unknown architecture '" + a.arch + "'");
    archs = {*arch};
  }
  Run run("nn", argv, s);
  const auto docs = read_corpus_store(run, a.corpus.empty() ? s.out / "corpus.json" : fs::path(a.corpus));
  std::optional<neural::EmbeddingTable> glove;
  if (!a.glove.empty()) glove = neural::load_glove(run.read_input(a.glove));

  NeuralRunSpec spec;
  spec.pipeline = make_pipeline(s, run, s.neural_apply_stemming);
  spec.validation_fraction = s.validation_fraction;
  spec.split_seed = s.seed;
  spec.min_df = s.neural_min_df;
  spec.glove = glove ? &*glove : nullptr;

  std::string report = csv::format_row([] {
    auto h = report_csv_header();
    h.insert(h.begin(), {"arch", "split", "n"});
    return h;
  }());
  ojson summary = ojson::object();
  for (auto arch : archs) {
    neural::NeuralConfig cfg;
    try {
      cfg = neural::NeuralConfig::from_json(s.neural, neural::NeuralConfig::defaults_for(arch));
    } catch (const json::exception& e) {
      throw InputError(std::string("config neural: ") + e.what());
    }
    cfg.arch = arch;
    if (!s.neural.contains("seed")) cfg.seed = s.seed;
    cfg.jobs = s.jobs;
    if (a.epochs) cfg.epochs = *a.epochs;
    if (a.max_len) cfg.max_len = *a.max_len;
    if (a.batch_size) cfg.batch_size = *a.batch_size;
    if (a.embed_dim) cfg.embed_dim = *a.embed_dim;
    if (a.hidden) cfg.hidden_units = *a.hidden;
    if (a.lr) cfg.learning_rate = *a.lr;
    spec.config = cfg;
    const auto result = run_neural(docs, spec);
    const std::string name(neural::to_string(arch));
    run.hash("vocab", result.vocab.hash());
    run.add_csv("history_" + name + ".csv", result.history.to_csv());
    run.add_raw("checkpoint_" + name + ".model",
                neural::save_checkpoint(result.net, result.vocab.hash(),
                                        {{"pipeline", pipeline_json(s, s.neural_apply_stemming)}}));
    run.add_raw("nn_vocab.txt", result.vocab.export_text());
    const auto add = [&](const char* split, const EvaluationReport& r) {
      auto row = report_csv_fields(r);
      row.insert(row.begin(), {name, split, std::to_string(r.confusion.total())});
      report += csv::format_row(row);
    };
    add("validation", result.validation);
    if (result.test) add("test", *result.test);
    summary[name] = {{"neutral_excluded", result.neutral_excluded},
                     {"vocabulary", result.vocab.size()},
                     {"embedding_hits", result.embedding_hits},
                     {"embedding", glove ? "glove" : "random"},
                     {"validation_accuracy", result.validation.accuracy},
                     {"test_accuracy", result.test ? ojson(result.test->accuracy) : ojson(nullptr)}};
    std::cout << "nn " << name << ": validation accuracy " << format_fixed(result.validation.accuracy, 4) << "\n";
  }
  run.add_csv("nn_report.csv", report);
  run.add_json("nn_summary.json", {{"runs", summary}});
  run.commit();
  return kOk;
}

struct EdaArgs {
  std::string in;
};

int cmd_eda(const Settings& s, const EdaArgs& a, const std::vector<std::string>& argv) {
  Run run("eda", argv, s);
  const fs::path in = a.in.empty() ? s.out : fs::path(a.in);
  std::vector<AppRecord> apps;
  std::vector<LabeledDocument> reviews;
  std::vector<SarRecord> survey;
  bool any = false;
  if (fs::exists(in / "apps.csv")) {
    apps = parse_apps_csv(run.read_input(in / "apps.csv")).records;
    any = true;
  }
  if (fs::exists(in / "corpus.json")) {
    for (auto& d : read_corpus_store(run, in / "corpus.json"))
      if (d.source == DocumentSource::GoogleTrain) reviews.push_back(std::move(d));
    any = true;
  }
  if (fs::exists(in / "survey.csv")) {
    survey = parse_sar_csv(run.read_input(in / "survey.csv")).records;
    any = true;
  }
  if (!any) throw InputError("eda: no ingest outputs found in " + in.string());
  const Lexicon lex = load_lexicon_for(s, run);
  eda::EdaInputs inputs;
  inputs.apps = apps.empty() ? nullptr : &apps;
  inputs.reviews = reviews.empty() ? nullptr : &reviews;
  inputs.survey = survey.empty() ? nullptr : &survey;
  inputs.lexicon = &lex;
  inputs.top_k = s.eda_top_k;
  const auto bundle = eda::build_bundle(inputs);
  for (const auto& [name, body] : bundle.files) run.add_csv(name, body);
  run.add_json("eda_summary.json", bundle.summary);
  run.commit();
  std::cout << "eda: " << bundle.files.size() << " tables\n";
  return kOk;
}

struct ScoreArgs {
  std::vector<std::string> texts;
  std::string file, model, vocab;
};

int cmd_score(const Settings& s, const ScoreArgs& a) {
  std::vector<std::string> lines = a.texts;
  if (!a.file.empty()) {
    std::istringstream in(read_file(a.file));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }
  // Blank inputs produce no output line.
  std::erase_if(lines, [](const std::string& l) { return trim(l).empty(); });
  std::string out;
  if (a.model.empty()) {
    if (!a.vocab.empty()) throw UsageError("score: --vocab needs --model");
    const Lexicon lex = s.lexicon_path.empty() ? default_lexicon() : load_lexicon(read_file(s.lexicon_path));
    for (const auto& line : lines) {
      const auto sc = score_raw_text(line, lex);
      out += std::string(to_string(sc.orientation)) + "\t" + format_double(sc.polarity) + "\t" +
             format_double(sc.subjectivity) + "\n";
    }
  } else {
    if (a.vocab.empty()) throw UsageError("score: --model needs --vocab");
    const auto vocab = Vocabulary::import_text(read_file(a.vocab));
    const auto text = read_file(a.model);
    TokenReader peek(text);
    peek.expect("sentilab-model");
    peek.integer();
    peek.expect("kind");
    if (neural::parse_arch(peek.word())) {
      json config;
      const auto net = neural::load_checkpoint(text, vocab.hash(), &config);
      const auto pipeline = pipeline_from_json(config.value("pipeline", json::object()));
      std::vector<TokenList> docs;
      for (const auto& line : lines) docs.push_back(preprocess(line, pipeline));
      std::vector<Sentiment> dummy(docs.size(), Sentiment::Positive);
      const auto batch = neural::encode_sequences(docs, dummy, vocab, net.config.max_len);
      for (auto label : neural::predict(net, batch)) out += std::string(to_string(label)) + "\n";
    } else {
      const auto loaded = load_model(text, vocab.hash());
      const auto& cfg = loaded.header.config;
      const auto feature = parse_feature_tag(cfg.value("feature", std::string("Unigram+TF-IDF")));
      if (!feature) throw InputError("model: unknown feature config");
      const auto pipeline = pipeline_from_json(json::parse(cfg.value("pipeline", ojson::object()).dump()));
      for (const auto& line : lines) {
        const auto v = vectorize(preprocess(line, pipeline), vocab, feature->scheme);
        out += std::string(to_string(predict(loaded.model, v))) + "\n";
      }
    }
  }
  std::cout << out;
  return kOk;
}

struct ReportArgs {
  std::string in;
};

int cmd_report(const Settings& s, const ReportArgs& a, const std::vector<std::string>& argv) {
  Run run("report", argv, s);
  const fs::path in = a.in.empty() ? s.out : fs::path(a.in);
  const auto rows = csv::parse(skip_comments(run.read_input(in / "grid.csv")));
  if (rows.empty()) throw InputError("report: grid.csv is empty");
  const auto& header = rows[0].fields;
  const auto col = [&](std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw InputError("report: grid.csv lacks column " + std::string(name));
  };
  const std::size_t c_config = col("config"), c_model = col("model");
  std::vector<std::string> configs, models;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> cell;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    if (f.size() != header.size()) throw InputError("report: grid.csv line " + std::to_string(rows[r].line) + " malformed");
    if (std::find(configs.begin(), configs.end(), f[c_config]) == configs.end()) configs.push_back(f[c_config]);
    if (std::find(models.begin(), models.end(), f[c_model]) == models.end()) models.push_back(f[c_model]);
    cell[{f[c_config], f[c_model]}] = f;
  }
  std::string md = "# Results\n";
  for (const char* metric : {"val_accuracy", "val_macro_f", "val_positive_f", "test_accuracy", "test_macro_f",
                             "test_positive_f"}) {
    const std::size_t c = col(metric);
    std::vector<std::string> head{"config"};
    head.insert(head.end(), models.begin(), models.end());
    std::string table = csv::format_row(head);
    md += "\n## " + std::string(metric) + "\n\n| config |";
    for (const auto& m : models) md += " " + m + " |";
    md += "\n|---|";
    for (std::size_t i = 0; i < models.size(); ++i) md += "---|";
    md += "\n";
    for (const auto& cfg : configs) {
      std::vector<std::string> row{cfg};
      md += "| " + cfg + " |";
      for (const auto& m : models) {
        auto it = cell.find({cfg, m});
        std::string v = it == cell.end() ? "" : it->second[c];
        if (it != cell.end() && v.empty() && !it->second.back().empty()) v = "error";
        row.push_back(v);
        md += " " + (v.empty() ? std::string("-") : v) + " |";
      }
      table += csv::format_row(row);
    }
    run.add_csv(std::string("report_") + metric + ".csv", table);
  }
  if (fs::exists(in / "nn_report.csv")) {
    const auto nn = csv::parse(skip_comments(run.read_input(in / "nn_report.csv")));
    md += "\n## neural\n\n| arch | split | n | accuracy | positive_f | macro_f |\n|---|---|---|---|---|---|\n";
    for (std::size_t r = 1; r < nn.size(); ++r) {
      const auto& f = nn[r].fields;
      if (f.size() < 7) continue;
      md += "| " + f[0] + " | " + f[1] + " | " + f[2] + " | " + f[4] + " | " + f[5] + " | " + f[6] + " |\n";
    }
  }
  run.add_markdown("report.md", md);
  run.commit();
  std::cout << "report: " << configs.size() << " configs x " << models.size() << " models\n";
  return kOk;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  CLI::App app{"sentilab: app-review sentiment experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  auto* opt_config = app.add_option("--config", config_path, "JSON config file");
  auto* opt_seed = app.add_option("--seed", seed, "master seed");
  auto* opt_out = app.add_option("--out", out_dir, "output directory");
  auto* opt_jobs = app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  (void)opt_config;

  IngestArgs ingest;
  auto* sc_ingest = app.add_subcommand("ingest", "parse and clean the input CSVs");
  sc_ingest->add_option("--apps", ingest.apps, "Google Play apps CSV");
  sc_ingest->add_option("--reviews", ingest.reviews, "Google Play user reviews CSV");
  sc_ingest->add_option("--sar", ingest.sar, "student survey CSV (6 columns)");

  GridArgs grid;
  std::string grid_config_list, grid_model_list;
  auto* sc_grid = app.add_subcommand("grid", "feature config x model grid");
  sc_grid->add_option("--corpus", grid.corpus, "corpus store (default OUT/corpus.json)");
  auto* opt_configs = sc_grid->add_option("--configs", grid_config_list, "comma-separated feature configs");
  auto* opt_models = sc_grid->add_option("--models", grid_model_list, "comma-separated models");
  sc_grid->add_flag("--save-models", grid.save_models, "write trained models and vocabularies");

  NnArgs nn;
  auto* sc_nn = app.add_subcommand("nn", "train RNN/LSTM/CNN classifiers");
  sc_nn->add_option("--arch", nn.arch, "RNN, LSTM, CNN or all");
  sc_nn->add_option("--glove", nn.glove, "GloVe text file");
  sc_nn->add_option("--corpus", nn.corpus, "corpus store (default OUT/corpus.json)");
  sc_nn->add_option("--epochs", nn.epochs);
  sc_nn->add_option("--max-len", nn.max_len);
  sc_nn->add_option("--batch-size", nn.batch_size);
  sc_nn->add_option("--embed-dim", nn.embed_dim);
  sc_nn->add_option("--hidden", nn.hidden);
  sc_nn->add_option("--lr", nn.lr);

  EdaArgs eda_args;
  auto* sc_eda = app.add_subcommand("eda", "rq1..rq8 statistics");
  sc_eda->add_option("--in", eda_args.in, "ingest output directory (default OUT)");

  ScoreArgs score;
  std::string lexicon_path;
  auto* sc_score = app.add_subcommand("score", "label texts with the lexicon or a trained model");
  sc_score->add_option("--text", score.texts, "text to score (repeatable)");
  sc_score->add_option("--file", score.file, "file with one text per line");
  sc_score->add_option("--model", score.model, "model or checkpoint file");
  sc_score->add_option("--vocab", score.vocab, "vocabulary file for --model");
  auto* opt_lexicon = sc_score->add_option("--lexicon", lexicon_path, "lexicon TSV");

  ReportArgs report;
  auto* sc_report = app.add_subcommand("report", "tables from grid.csv and nn_report.csv");
  sc_report->add_option("--in", report.in, "directory with grid.csv (default OUT)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    Settings s;
    if (!config_path.empty()) apply_config_file(s, config_path);
    if (opt_seed->count()) s.seed = seed;
    if (opt_out->count()) s.out = out_dir;
    if (opt_jobs->count()) s.jobs = jobs;
    if (opt_configs->count()) s.grid_configs = split_list(grid_config_list);
    if (opt_models->count()) s.grid_models = split_list(grid_model_list);
    if (opt_lexicon->count()) s.lexicon_path = lexicon_path;

    if (*sc_ingest) return cmd_ingest(s, ingest, args);
    if (*sc_grid) return cmd_grid(s, grid, args);
    if (*sc_nn) return cmd_nn(s, nn, args);
    if (*sc_eda) return cmd_eda(s, eda_args, args);
    if (*sc_score) return cmd_score(s, score);
    if (*sc_report) return cmd_report(s, report, args);
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "sentilab: " << e.what() << "\n";
    return kUsage;
  } catch (const InputError& e) {
    std::cerr << "sentilab: input error: " << e.what() << "\n";
    return kInput;
  } catch (const DivergenceError& e) {
    std::cerr << "sentilab: " << e.what() << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "sentilab: " << e.what() << "\n";
    return kRuntime;
  }
}
