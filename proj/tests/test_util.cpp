#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <set>

#include "sentilab/util/csv.hpp"
#include "sentilab/util/io.hpp"
#include "sentilab/util/rng.hpp"
#include "sentilab/util/tokens.hpp"

using namespace sentilab;

TEST_CASE("csv parse handles quotes, embedded commas and newlines") {
  const auto rows = csv::parse("a,b,c\n\"x, y\",\"he said \"\"hi\"\"\",\"two\nlines\"\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].fields == std::vector<std::string>{"a", "b", "c"});
  CHECK(rows[1].fields == std::vector<std::string>{"x, y", "he said \"hi\"", "two\nlines"});
  CHECK(rows[1].line == 2);
}

TEST_CASE("csv parse strips BOM and CRLF") {
  const auto rows = csv::parse("\xEF\xBB\xBFh1,h2\r\n1,2\r\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].fields[0] == "h1");
  CHECK(rows[1].fields == std::vector<std::string>{"1", "2"});
}

TEST_CASE("csv format_row round-trips through parse") {
  Rng rng(11);
  const std::string alphabet = "ab,\"\n x";
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> fields(1 + rng.below(5));
    for (auto& f : fields)
      for (auto n = rng.below(6); n > 0; --n) f.push_back(alphabet[rng.below(alphabet.size())]);
    // A lone empty field is an empty line; keep at least two fields for that case.
    if (fields.size() == 1 && fields[0].empty()) fields.push_back("z");
    const auto rows = csv::parse(csv::format_row(fields));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].fields == fields);
  }
}

TEST_CASE("splitmix64 matches the reference sequence") {
  std::uint64_t s = 0;
  CHECK(splitmix64(s) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(s) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("rng streams are reproducible and independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(Rng::derive_seed(42, {1, 2}) == Rng::derive_seed(42, {1, 2}));
  CHECK(Rng::derive_seed(42, {1, 2}) != Rng::derive_seed(42, {2, 1}));
  CHECK(Rng::derive_seed(42, {1}) != Rng::derive_seed(43, {1}));

  Rng r(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(r.below(7) < 7);
  }
}

TEST_CASE("shuffle is a permutation") {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
  Rng r(3);
  r.shuffle(std::span<int>(v));
  std::set<int> seen(v.begin(), v.end());
  CHECK(seen.size() == 50);
}

TEST_CASE("format_double is shortest round-trip") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) {
    double back = 0;
    REQUIRE(parse_double(format_double(x), back));
    CHECK(back == x);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_fixed(2.0 / 3.0, 6) == "0.666667");
}

TEST_CASE("fnv1a64 known value") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("write_file_atomic writes and replaces") {
  const auto dir = std::filesystem::temp_directory_path() / "sentilab_util_test";
  std::filesystem::create_directories(dir);
  const auto p = dir / "f.txt";
  write_file_atomic(p, "one");
  write_file_atomic(p, "two");
  CHECK(read_file(p) == "two");
  CHECK_THROWS_AS(read_file(dir / "missing.txt"), InputError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("token writer and reader round-trip") {
  TokenWriter w;
  w.word("hdr").integer(-3).number(0.1).text("spaced out\ntext").newline().word("end");
  const std::string text = w.str();
  TokenReader r(text);
  r.expect("hdr");
  CHECK(r.integer() == -3);
  CHECK(r.number() == 0.1);
  CHECK(r.text() == "spaced out\ntext");
  r.expect("end");
  CHECK(r.at_end());
  TokenReader bad("x");
  CHECK_THROWS_AS(bad.number(), InputError);
}
