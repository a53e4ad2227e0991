#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hyret/text.hpp"

namespace hyret {

// A retrievable unit. tokens is tokenize(title) followed by tokenize(text).
struct Passage {
  std::string id;
  std::optional<std::string> title;
  std::string text;
  std::vector<Token> tokens;

  static Passage make(std::string id, std::optional<std::string> title, std::string text);
};

struct CollectionStats {
  std::size_t doc_count = 0;
  double avg_len = 0.0;
  std::unordered_map<Token, std::uint32_t> df;
};

// Smoothed Robertson/Sparck-Jones IDF, non-negative for any df.
// Terms absent from the collection are treated as df = 0.
double idf(const CollectionStats& stats, const Token& term);

class PassageCollection {
 public:
  PassageCollection() = default;
  static PassageCollection from_passages(std::vector<Passage> passages);

  const std::vector<Passage>& passages() const { return passages_; }
  const Passage* find(const std::string& id) const;
  std::size_t size() const { return passages_.size(); }
  bool empty() const { return passages_.empty(); }

  // Throws when the collection is empty (no stats to report).
  const CollectionStats& stats() const;

 private:
  std::vector<Passage> passages_;
  std::unordered_map<std::string, std::size_t> by_id_;
  CollectionStats stats_;
};

// Reads newline-delimited JSON records {"id", "title"?, "text"}, chunks each
// record with chunk_passage and assigns chunk ids "{record_id}#{index}".
PassageCollection ingest(const std::filesystem::path& path, std::size_t max_tokens);

void save_collection(const PassageCollection& collection, const std::filesystem::path& path);
PassageCollection load_collection(const std::filesystem::path& path);

}  // namespace hyret
