#include <catch_amalgamated.hpp>

#include "properties.hpp"
#include "sentilab/corpus.hpp"
#include "sentilab/util/io.hpp"

using namespace sentilab;

namespace {

std::string fixture(const std::string& name) { return read_file(std::string(SENTILAB_TEST_DATA) + "/" + name); }

const std::string kAppsHeader =
    "App,Category,Rating,Reviews,Size,Installs,Type,Price,Content Rating,Genres,Last Updated,Current Ver,Android Ver\n";

std::string word(Rng& rng, std::size_t max_len = 8) {
  static const std::string chars = "abcXYZ &.,-\"'";
  std::string w(1, "abcdefgh"[rng.below(8)]);
  for (auto n = rng.below(max_len); n > 0; --n) w.push_back(chars[rng.below(chars.size())]);
  w.push_back("xyz"[rng.below(3)]);
  return w;
}

AppRecord random_app(Rng& rng) {
  AppRecord a;
  a.name = word(rng, 20);
  a.category = word(rng);
  if (rng.uniform() < 0.8) a.rating = 1.0 + 4.0 * rng.uniform();
  a.reviews_count = rng.below(1'000'000'000);
  if (rng.uniform() < 0.8) a.size_bytes = rng.below(200ULL << 20);
  a.installs_lower_bound = rng.below(2'000'000'000);
  a.app_type = rng.uniform() < 0.7 ? AppType::Free : AppType::Paid;
  a.price_usd = a.app_type == AppType::Free ? 0.0 : 0.01 + rng.uniform() * 400.0;
  if (rng.uniform() < 0.9) a.content_rating = word(rng);
  for (auto n = rng.below(3); n > 0; --n) a.genres.push_back(word(rng));
  a.last_updated = {2010 + static_cast<int>(rng.below(10)), 1 + static_cast<int>(rng.below(12)),
                    1 + static_cast<int>(rng.below(31))};
  if (rng.uniform() < 0.9) a.current_version = word(rng);
  if (rng.uniform() < 0.9) a.android_version = word(rng);
  return a;
}

}  // namespace

TEST_CASE("size and installs parse rules") {
  bool varies = false;
  CHECK(corpus_detail::parse_size("19M", varies) == 19922944u);
  CHECK(corpus_detail::parse_size("201k", varies) == 201u * 1024u);
  CHECK(corpus_detail::parse_size("3.0M", varies) == 3u * 1048576u);
  CHECK_FALSE(corpus_detail::parse_size("Varies with device", varies));
  CHECK(varies);
  CHECK(corpus_detail::parse_installs("10,000+") == 10000u);
  CHECK(corpus_detail::parse_installs("0") == 0u);
  CHECK(corpus_detail::parse_price("$4.99") == 4.99);
  CHECK(corpus_detail::parse_date("January 7, 2018") == Date{2018, 1, 7});
}

TEST_CASE("apps fixture parses with the malformed row dropped") {
  const auto r = parse_apps_csv(fixture("apps_small.csv"));
  CHECK(r.report.rows_read == 11);
  CHECK(r.report.rows_dropped == 1);
  CHECK(r.report.reasons.at("field_count") == 1);
  REQUIRE(r.records.size() == 10);
  CHECK(r.records.size() + r.report.rows_dropped == r.report.rows_read);

  const auto& first = r.records[0];
  CHECK(first.size_bytes == 19922944u);
  CHECK(first.installs_lower_bound == 10000u);
  CHECK(first.genres == std::vector<std::string>{"Art & Design"});
  const auto& minecraft = r.records[4];
  CHECK(minecraft.name == "Minecraft");
  CHECK(minecraft.app_type == AppType::Paid);
  CHECK(minecraft.price_usd == 6.99);
  CHECK_FALSE(minecraft.size_bytes);
  CHECK_FALSE(r.records[5].rating);               // NaN rating
  CHECK(r.records[5].android_version.empty());    // NaN version
  CHECK(r.records[8].size_bytes == 512u * 1024u);  // 512k
  CHECK(r.records[9].app_type == AppType::Free);  // NaN type, price 0
}

TEST_CASE("missing header column is fatal") {
  CHECK_THROWS_AS(parse_apps_csv("App,Category\nx,y\n"), InputError);
  CHECK_THROWS_AS(parse_apps_csv(""), InputError);
  CHECK_THROWS_AS(parse_reviews_csv("Foo,Bar\n"), InputError);
}

TEST_CASE("bad numeric cell drops the row") {
  const auto r = parse_apps_csv(kAppsHeader + "A,C,4.0,lots,1M,1+,Free,0,Everyone,G,\"May 1, 2016\",1,2\n" +
                                "B,C,7.5,1,1M,1+,Free,0,Everyone,G,\"May 1, 2016\",1,2\n" +
                                "D,C,4.0,1,1M,1+,Free,0,Everyone,G,\"May 1, 2016\",1,2\n");
  CHECK(r.records.size() == 1);
  CHECK(r.report.rows_dropped == 2);
  CHECK(r.report.reasons.at("bad_reviews_count") == 1);
  CHECK(r.report.reasons.at("rating_out_of_range") == 1);
}

TEST_CASE("apps round-trip through the canonical writer") {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    std::vector<AppRecord> apps;
    for (auto n = 1 + rng.below(4); n > 0; --n) apps.push_back(random_app(rng));
    const auto back = parse_apps_csv(write_apps_csv(apps));
    REQUIRE(back.report.rows_dropped == 0);
    REQUIRE(back.records == apps);
  }
}

TEST_CASE("reviews parsing") {
  const std::string header = "App,Translated_Review,Sentiment,Sentiment_Polarity,Sentiment_Subjectivity\n";
  const auto r = parse_reviews_csv(header + "A,Best app ever,Positive,1.0,0.3\nB,,Positive,0.5,0.5\nC,nan,nan,nan,nan\n" +
                                   "D,Some text,Positive,nan,0.4\n");
  REQUIRE(r.records.size() == 2);
  CHECK(r.report.rows_dropped == 2);
  CHECK(r.report.reasons.at("empty_review") == 2);
  CHECK(r.records[0].provided_sentiment == Sentiment::Positive);
  CHECK(r.records[0].provided_polarity == 1.0);
  CHECK(r.records[0].provided_subjectivity == 0.3);
  CHECK_FALSE(r.records[1].provided_sentiment);
  CHECK_FALSE(r.records[1].provided_polarity);
  CHECK_FALSE(r.records[1].provided_subjectivity);
  CHECK(r.report.reasons.at("inconsistent_sentiment_fields") == 1);

  const auto fx = parse_reviews_csv(fixture("reviews_small.csv"));
  CHECK(fx.report.rows_read == 92);
  CHECK(fx.records.size() + fx.report.rows_dropped == fx.report.rows_read);
}

TEST_CASE("survey parsing") {
  const std::string header = "Department,App,Review,Rating,Type,Category\n";
  const auto r = parse_sar_csv(header +
                               "Mathematics,Unacademy,\"It\xE2\x80\x99s helpful to learn at home...\",5,Free,Education\n" +
                               "X,Y,text,0,Free,Z\n");
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].app_name == "Unacademy");
  CHECK(r.records[0].rating == 5);
  CHECK(r.report.reasons.at("rating_out_of_range") == 1);
  CHECK_THROWS_AS(parse_sar_csv("a,b,c\n1,2,3\n"), InputError);

  const auto fx = parse_sar_csv(fixture("sar_small.csv"));
  CHECK(fx.records.size() == 24);
  CHECK(fx.records.size() <= 400);
}

TEST_CASE("rating labels") {
  CHECK(label_from_rating(1) == Sentiment::Negative);
  CHECK(label_from_rating(2) == Sentiment::Negative);
  CHECK(label_from_rating(3) == Sentiment::Positive);
  CHECK(label_from_rating(4) == Sentiment::Positive);
  CHECK(label_from_rating(5) == Sentiment::Positive);
  CHECK_THROWS_AS(label_from_rating(0), PreconditionError);
  CHECK_THROWS_AS(label_from_rating(6), PreconditionError);
}

TEST_CASE("documents from reviews use provided labels, then the fallback") {
  std::vector<ReviewRecord> reviews(3);
  reviews[0].review_text = "a";
  reviews[0].provided_sentiment = Sentiment::Negative;
  reviews[1].review_text = "b";
  reviews[2].review_text = "c";
  LabelingReport rep;
  const auto docs = documents_from_reviews(
      reviews, [](std::string_view t) -> std::optional<Sentiment> { if (t == "b") return Sentiment::Neutral; return std::nullopt; },
      &rep);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].label == Sentiment::Negative);
  CHECK(docs[1].label == Sentiment::Neutral);
  CHECK(rep.from_provided == 1);
  CHECK(rep.from_fallback == 1);
  CHECK(rep.unlabeled == 1);
}

TEST_CASE("clean_corpus") {
  CHECK(clean_corpus({}).empty());
  const LabeledDocument a{"good app", Sentiment::Positive, DocumentSource::GoogleTrain};
  const LabeledDocument empty{"!!! 123", Sentiment::Positive, DocumentSource::GoogleTrain};
  CleaningReport rep;
  const auto out = clean_corpus({a, empty, a}, &rep);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == a);
  CHECK(rep.removed_duplicate == 1);
  CHECK(rep.removed_empty == 1);
}

TEST_CASE("clean_corpus is idempotent (1000 cases)") {
  const auto r = testing::clean_idempotence(1000, 17);
  CHECK(r.cases == 1000);
  INFO(r.first_failure);
  CHECK(r.ok());
}

TEST_CASE("corpus store JSON round-trip") {
  const std::vector<LabeledDocument> docs{{"x \"y\"", Sentiment::Neutral, DocumentSource::GoogleTrain},
                                          {"z", Sentiment::Negative, DocumentSource::SarTest}};
  CHECK(documents_from_json(nlohmann::json::parse(documents_to_json(docs).dump())) == docs);
}
