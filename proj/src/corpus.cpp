#include "hyret/corpus.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "hyret/io.hpp"

namespace hyret {

Passage Passage::make(std::string id, std::optional<std::string> title, std::string text) {
  Passage p;
  p.id = std::move(id);
  p.title = std::move(title);
  p.text = std::move(text);
  p.tokens = tokenize(p.title ? std::string_view(*p.title) : std::string_view{});
  std::vector<Token> body = tokenize(p.text);
  p.tokens.insert(p.tokens.end(), std::make_move_iterator(body.begin()),
                  std::make_move_iterator(body.end()));
  return p;
}

double idf(const CollectionStats& stats, const Token& term) {
  auto it = stats.df.find(term);
  const double df = it == stats.df.end() ? 0.0 : static_cast<double>(it->second);
  const double n = static_cast<double>(stats.doc_count);
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

PassageCollection PassageCollection::from_passages(std::vector<Passage> passages) {
  PassageCollection col;
  col.passages_ = std::move(passages);
  std::size_t total_len = 0;
  std::unordered_set<Token> seen;
  for (std::size_t i = 0; i < col.passages_.size(); ++i) {
    const Passage& p = col.passages_[i];
    if (!col.by_id_.emplace(p.id, i).second)
      throw std::runtime_error("duplicate passage id: " + p.id);
    total_len += p.tokens.size();
    seen.clear();
    for (const Token& t : p.tokens)
      if (seen.insert(t).second) ++col.stats_.df[t];
  }
  col.stats_.doc_count = col.passages_.size();
  col.stats_.avg_len = col.passages_.empty()
                           ? 0.0
                           : static_cast<double>(total_len) /
                                 static_cast<double>(col.passages_.size());
  return col;
}

const Passage* PassageCollection::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &passages_[it->second];
}

const CollectionStats& PassageCollection::stats() const {
  if (passages_.empty())
    throw std::runtime_error("collection is empty; no statistics available");
  return stats_;
}

PassageCollection ingest(const std::filesystem::path& path, std::size_t max_tokens) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open corpus file: " + path.string());

  std::vector<Passage> passages;
  std::unordered_set<std::string> record_ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path.string() + " line " + std::to_string(lineno) +
                               ": invalid JSON (" + e.what() + ")");
    }
    auto field = [&](const char* name) -> std::string {
      if (!rec.contains(name) || !rec[name].is_string())
        throw std::runtime_error(path.string() + " line " + std::to_string(lineno) +
                                 ": missing string field \"" + name + "\"");
      return rec[name].get<std::string>();
    };
    std::string id = field("id");
    std::string text = field("text");
    std::optional<std::string> title;
    if (rec.contains("title")) {
      if (!rec["title"].is_string())
        throw std::runtime_error(path.string() + " line " + std::to_string(lineno) +
                                 ": field \"title\" must be a string");
      title = rec["title"].get<std::string>();
    }
    if (!record_ids.insert(id).second)
      throw std::runtime_error(path.string() + " line " + std::to_string(lineno) +
                               ": duplicate record id \"" + id + "\"");
    std::vector<Chunk> chunks;
    try {
      chunks = chunk_passage(title.value_or(""), text, max_tokens);
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + " line " + std::to_string(lineno) + ": " +
                               e.what());
    }
    for (std::size_t c = 0; c < chunks.size(); ++c)
      passages.push_back(
          Passage::make(id + "#" + std::to_string(c), title, std::move(chunks[c].text)));
  }
  return PassageCollection::from_passages(std::move(passages));
}

namespace {
constexpr std::string_view kCollectionMagic = "HYRC";
constexpr std::uint32_t kCollectionVersion = 1;
}  // namespace

void save_collection(const PassageCollection& collection, const std::filesystem::path& path) {
  ByteWriter w;
  w.u64(collection.size());
  for (const Passage& p : collection.passages()) {
    w.str(p.id);
    w.u32(p.title.has_value() ? 1 : 0);
    if (p.title) w.str(*p.title);
    w.str(p.text);
  }
  w.write_file(path, kCollectionMagic, kCollectionVersion);
}

PassageCollection load_collection(const std::filesystem::path& path) {
  ByteReader r(path, kCollectionMagic, kCollectionVersion);
  std::uint64_t count = r.u64();
  std::vector<Passage> passages;
  passages.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string id = r.str();
    std::optional<std::string> title;
    if (r.u32() != 0) title = r.str();
    std::string text = r.str();
    passages.push_back(Passage::make(std::move(id), std::move(title), std::move(text)));
  }
  return PassageCollection::from_passages(std::move(passages));
}

}  // namespace hyret
