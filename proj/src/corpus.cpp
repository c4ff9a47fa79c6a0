#include "gw/corpus.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <unordered_set>

#include <json.hpp>

#include "gw/error.hpp"

namespace gw {
namespace {

using nlohmann::json;

bool is_stripped_punct(char c) {
  const unsigned char u = static_cast<unsigned char>(c);
  if (u >= 0x80) return false;  // non-ASCII passes through
  if (c == '\'' || c == '-') return false;
  return std::ispunct(u) != 0;
}

std::optional<GeoArticle> parse_record(const std::string& line) {
  json rec = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (rec.is_discarded() || !rec.is_object()) return std::nullopt;
  if (!rec.contains("id") || !rec["id"].is_string()) return std::nullopt;
  if (!rec.contains("title") || !rec["title"].is_string()) return std::nullopt;
  if (!rec.contains("lat") || !rec["lat"].is_number()) return std::nullopt;
  if (!rec.contains("lon") || !rec["lon"].is_number()) return std::nullopt;
  if (!rec.contains("text") || !rec["text"].is_string()) return std::nullopt;

  GeoArticle a;
  a.id = rec["id"].get<std::string>();
  a.title = rec["title"].get<std::string>();
  a.lat = rec["lat"].get<double>();
  a.lon = rec["lon"].get<double>();
  a.body = rec["text"].get<std::string>();
  if (rec.contains("category") && rec["category"].is_string()) {
    a.category = rec["category"].get<std::string>();
  }
  if (a.id.empty() || !a.location_valid()) return std::nullopt;
  return a;
}

}  // namespace

ParseResult parse_corpus(std::istream& in, std::optional<size_t> limit) {
  if (!in) throw Error("corpus", "unreadable input stream");

  ParseResult result;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  while (std::getline(in, line)) {
    if (limit && result.articles.size() >= *limit) break;
    if (line.empty()) continue;
    auto article = parse_record(line);
    if (!article || !seen_ids.insert(article->id).second) {
      ++result.skipped;
      continue;
    }
    result.articles.push_back(std::move(*article));
  }
  if (in.bad()) throw Error("corpus", "read failure on input stream");
  return result;
}

ParseResult parse_corpus_file(const std::string& path,
                              std::optional<size_t> limit) {
  std::ifstream in(path);
  if (!in) throw Error("corpus", "cannot open corpus file: " + path);
  return parse_corpus(in, limit);
}

std::vector<std::string> preprocess(const std::string& body) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : body) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::isspace(u)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
      continue;
    }
    if (is_stripped_punct(c)) continue;
    current.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<TokenizedDoc> tokenize_corpus(const std::vector<GeoArticle>& articles) {
  std::vector<TokenizedDoc> docs;
  docs.reserve(articles.size());
  for (const auto& a : articles) {
    docs.push_back({a.id, preprocess(a.body)});
  }
  return docs;
}

std::string to_corpus_line(const GeoArticle& article) {
  json rec;
  rec["id"] = article.id;
  rec["title"] = article.title;
  rec["lat"] = article.lat;
  rec["lon"] = article.lon;
  rec["text"] = article.body;
  if (!article.category.empty()) rec["category"] = article.category;
  return rec.dump();
}

}  // namespace gw
