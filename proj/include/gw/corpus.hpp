#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gw {

// One geolocated document: text plus the coordinate it is anchored to.
struct GeoArticle {
  std::string id;
  std::string title;
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]
  std::string body;
  std::string category;  // optional tag, empty when absent

  bool location_valid() const {
    return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
  }
};

struct TokenizedDoc {
  std::string id;
  std::vector<std::string> tokens;
};

struct ParseResult {
  std::vector<GeoArticle> articles;
  size_t skipped = 0;  // malformed or invalid records
};

// Reads the line-delimited corpus format: one JSON object per line with
// keys id, title, lat, lon, text and optional category. Records that fail
// validation (bad JSON, missing keys, out-of-range coordinates, duplicate
// ids) are skipped and counted. Stops after `limit` articles when given.
ParseResult parse_corpus(std::istream& in,
                         std::optional<size_t> limit = std::nullopt);
ParseResult parse_corpus_file(const std::string& path,
                              std::optional<size_t> limit = std::nullopt);

// Lowercases ASCII letters, deletes ASCII punctuation except apostrophe and
// hyphen (word-internal in English), and splits on whitespace. Bytes
// outside ASCII pass through unchanged. Never produces empty tokens.
std::vector<std::string> preprocess(const std::string& body);

std::vector<TokenizedDoc> tokenize_corpus(const std::vector<GeoArticle>& articles);

// Serializes one article as a corpus-format JSON line (no trailing newline).
std::string to_corpus_line(const GeoArticle& article);

}  // namespace gw
