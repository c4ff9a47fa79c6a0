#include <doctest.h>

#include <set>
#include <sstream>

#include "gw/corpus.hpp"
#include "gw/error.hpp"
#include "gw/synthgen.hpp"

using namespace gw;

TEST_SUITE("corpus") {

TEST_CASE("parse keeps valid records in file order") {
  std::stringstream in(
      R"({"id":"a1","title":"One","lat":0.5,"lon":32.1,"text":"first body"})"
      "\n"
      R"({"id":"a2","title":"Two","lat":-1.25,"lon":30.0,"text":"second"})"
      "\n"
      R"({"id":"a3","title":"Three","lat":2.0,"lon":33.0,"text":"third","category":"school"})"
      "\n");
  const ParseResult result = parse_corpus(in);
  REQUIRE(result.articles.size() == 3);
  CHECK(result.skipped == 0);
  CHECK(result.articles[0].id == "a1");
  CHECK(result.articles[1].id == "a2");
  CHECK(result.articles[2].id == "a3");
  CHECK(result.articles[0].title == "One");
  CHECK(result.articles[0].lat == doctest::Approx(0.5));
  CHECK(result.articles[0].body == "first body");
  CHECK(result.articles[0].category.empty());
  CHECK(result.articles[2].category == "school");
}

TEST_CASE("out-of-range latitude is skipped and counted") {
  std::stringstream in(
      R"({"id":"bad","title":"x","lat":95.0,"lon":0.0,"text":"t"})"
      "\n"
      R"({"id":"ok","title":"y","lat":5.0,"lon":0.0,"text":"t"})"
      "\n");
  const ParseResult result = parse_corpus(in);
  CHECK(result.articles.size() == 1);
  CHECK(result.articles[0].id == "ok");
  CHECK(result.skipped == 1);
}

TEST_CASE("malformed json, missing keys, and duplicate ids are skipped") {
  std::stringstream in(
      "this is not json\n"
      R"({"id":"a","title":"x","lat":1.0,"text":"missing lon"})"
      "\n"
      R"({"id":"a","title":"x","lat":1.0,"lon":2.0,"text":"ok"})"
      "\n"
      R"({"id":"a","title":"dup","lat":1.0,"lon":2.0,"text":"dup"})"
      "\n");
  const ParseResult result = parse_corpus(in);
  CHECK(result.articles.size() == 1);
  CHECK(result.skipped == 3);
}

TEST_CASE("limit stops early") {
  std::stringstream in;
  for (int i = 0; i < 10; ++i) {
    in << R"({"id":"d)" << i << R"(","title":"t","lat":0.0,"lon":0.0,"text":"x"})"
       << "\n";
  }
  const ParseResult result = parse_corpus(in, 4);
  CHECK(result.articles.size() == 4);
  CHECK(result.articles[3].id == "d3");
}

TEST_CASE("synthetic 1000-record file round-trips") {
  RegionSpec spec = default_region_a();
  spec.articles = 1000;
  const std::vector<GeoArticle> articles = gen_corpus(spec);
  std::stringstream buffer;
  write_corpus(articles, buffer);

  const ParseResult result = parse_corpus(buffer);
  REQUIRE(result.articles.size() == 1000);
  CHECK(result.skipped == 0);
  std::set<std::string> ids;
  for (const GeoArticle& a : result.articles) ids.insert(a.id);
  CHECK(ids.size() == 1000);
  for (size_t i = 0; i < articles.size(); ++i) {
    CHECK(result.articles[i].id == articles[i].id);
    CHECK(result.articles[i].lat == articles[i].lat);
    CHECK(result.articles[i].lon == articles[i].lon);
    CHECK(result.articles[i].body == articles[i].body);
    CHECK(result.articles[i].category == articles[i].category);
  }
}

TEST_CASE("preprocess strips punctuation and lowercases") {
  CHECK(preprocess("The Dam, built 1954.") ==
        std::vector<std::string>{"the", "dam", "built", "1954"});
  CHECK(preprocess("").empty());
  CHECK(preprocess("Kampala's  light-rail!!") ==
        std::vector<std::string>{"kampala's", "light-rail"});
}

TEST_CASE("preprocess passes non-ascii bytes through and never emits empty tokens") {
  const auto tokens = preprocess("caf\xc3\xa9 ... (x)");
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0] == "caf\xc3\xa9");
  CHECK(tokens[1] == "x");
  for (const auto& t : tokens) CHECK(!t.empty());
}

TEST_CASE("tokenize_corpus pairs ids with preprocessed bodies") {
  GeoArticle a;
  a.id = "doc1";
  a.title = "T";
  a.body = "Hello, World!";
  const auto docs = tokenize_corpus({a});
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].id == "doc1");
  CHECK(docs[0].tokens == std::vector<std::string>{"hello", "world"});
}

TEST_CASE("to_corpus_line emits a parseable record") {
  GeoArticle a;
  a.id = "x9";
  a.title = "A \"quoted\" title";
  a.lat = -3.25;
  a.lon = 101.5;
  a.body = "body text";
  a.category = "hospital";
  std::stringstream in(to_corpus_line(a) + "\n");
  const ParseResult result = parse_corpus(in);
  REQUIRE(result.articles.size() == 1);
  const GeoArticle& b = result.articles[0];
  CHECK(b.id == a.id);
  CHECK(b.title == a.title);
  CHECK(b.lat == a.lat);
  CHECK(b.lon == a.lon);
  CHECK(b.body == a.body);
  CHECK(b.category == a.category);
}

TEST_CASE("missing file raises a corpus error") {
  CHECK_THROWS_AS(parse_corpus_file("/nonexistent/corpus.jsonl"), Error);
}

}  // TEST_SUITE
