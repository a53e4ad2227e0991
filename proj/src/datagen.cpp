#include "hyret/datagen.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "hyret/io.hpp"

namespace hyret {

std::mt19937_64 passage_rng(std::uint64_t seed, const std::string& passage_id) {
  return std::mt19937_64(mix64(seed, fnv1a(passage_id)));
}

std::vector<IctSample> gen_ict(const Passage& passage, const GenConfig& cfg,
                               std::mt19937_64& rng) {
  std::vector<Sentence> sentences = split_sentences(passage.text);
  if (sentences.empty() || cfg.ict_max_sentences <= 0) return {};

  const std::size_t take =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.ict_max_sentences), sentences.size());
  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Partial Fisher-Yates; first `take` entries are a uniform sample without
  // replacement.
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }

  std::vector<Token> title_tokens =
      tokenize(passage.title ? std::string_view(*passage.title) : std::string_view{});
  std::bernoulli_distribution mask(cfg.ict_mask_rate);

  std::vector<IctSample> out;
  for (std::size_t s = 0; s < take; ++s) {
    const std::size_t idx = order[s];
    std::vector<Token> question = tokenize(sentences[idx].text);
    if (question.empty()) continue;
    IctSample sample;
    sample.pair = {std::move(question), passage.id, PairSource::Ict};
    sample.masked = mask(rng);
    if (sample.masked) {
      sample.effective_passage = title_tokens;
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (i == idx) continue;
        for (Token& t : tokenize(sentences[i].text))
          sample.effective_passage.push_back(std::move(t));
      }
    } else {
      sample.effective_passage = passage.tokens;
    }
    out.push_back(std::move(sample));
  }
  return out;
}

std::vector<TrainingPair> gen_ngram(const Passage& passage, const GenConfig& cfg) {
  if (cfg.ngram_stride < 1 || cfg.ngram_n < cfg.ngram_stride)
    throw std::invalid_argument("ngram config requires stride >= 1 and n >= stride");
  const auto& tokens = passage.tokens;
  const std::size_t n = static_cast<std::size_t>(cfg.ngram_n);
  const std::size_t stride = static_cast<std::size_t>(cfg.ngram_stride);
  const std::size_t len = tokens.size();
  if (len == 0) return {};

  const bool sole_window = len <= stride;
  std::vector<TrainingPair> out;
  for (std::size_t start = 0; start < len; start += stride) {
    const std::size_t end = std::min(start + n, len);
    const std::size_t window = end - start;
    if (window < stride && !sole_window) continue;
    out.push_back({{tokens.begin() + static_cast<std::ptrdiff_t>(start),
                    tokens.begin() + static_cast<std::ptrdiff_t>(end)},
                   passage.id,
                   PairSource::Ngram});
  }
  return out;
}

std::vector<Sentence> salient_sentences(const Passage& passage, const CollectionStats& stats,
                                        int k) {
  if (k <= 0) return {};
  std::vector<Sentence> sentences = split_sentences(passage.text);
  std::vector<std::pair<double, std::size_t>> scored;  // (-salience, position)
  scored.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    double best = 0.0;
    for (const Token& t : tokenize(sentences[i].text)) best = std::max(best, idf(stats, t));
    scored.emplace_back(-best, i);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<Sentence> out;
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(sentences[scored[i].second]);
  return out;
}

std::vector<Token> standin_question(std::span<const Token> input, const CollectionStats& stats) {
  constexpr std::size_t kTopTerms = 5;
  struct TermInfo {
    double idf;
    std::size_t first_pos;
  };
  std::unordered_map<Token, TermInfo> terms;
  for (std::size_t i = 0; i < input.size(); ++i)
    terms.try_emplace(input[i], TermInfo{idf(stats, input[i]), i});

  std::vector<std::pair<Token, TermInfo>> ranked(terms.begin(), terms.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.idf != b.second.idf) return a.second.idf > b.second.idf;
    return a.second.first_pos < b.second.first_pos;
  });
  if (ranked.size() > kTopTerms) ranked.resize(kTopTerms);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second.first_pos < b.second.first_pos;
  });

  std::vector<Token> question{"what", "is", "known", "about"};
  for (auto& entry : ranked) question.push_back(std::move(entry.first));
  return question;
}

std::vector<TrainingPair> gen_questions(const Passage& passage, const CollectionStats& stats,
                                        const GenConfig& cfg) {
  std::vector<TrainingPair> out;
  std::unordered_set<std::string> seen;
  auto emit = [&](std::vector<Token> question) {
    std::string key;
    for (const Token& t : question) {
      key += t;
      key.push_back(' ');
    }
    if (!seen.insert(key).second) return;
    out.push_back({std::move(question), passage.id, PairSource::QGen});
  };

  std::span<const Token> truncated(passage.tokens.data(),
                                   std::min(passage.tokens.size(), kQgenTokenBudget));
  emit(standin_question(truncated, stats));
  for (const Sentence& s : salient_sentences(passage, stats, cfg.salient_top_k)) {
    std::vector<Token> sentence_tokens = tokenize(s.text);
    emit(standin_question(sentence_tokens, stats));
  }
  return out;
}

std::vector<TrainingPair> load_external_pairs(const std::filesystem::path& path,
                                              const PassageCollection& collection) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open external question file: " + path.string());
  std::vector<TrainingPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      nlohmann::json rec = nlohmann::json::parse(line);
      TrainingPair p;
      p.question = tokenize(rec.at("question").get<std::string>());
      p.passage_id = rec.at("passage_id").get<std::string>();
      p.source = PairSource::External;
      if (p.question.empty()) throw std::runtime_error("question has no tokens");
      if (collection.find(p.passage_id) == nullptr)
        throw std::runtime_error("unknown passage id \"" + p.passage_id + "\"");
      out.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + " line " + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  return out;
}

PassageCollection subsample_corpus(const PassageCollection& collection, double fraction,
                                   std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("fraction must be in (0, 1]");
  auto doc_key = [](const std::string& id) {
    const std::size_t pos = id.rfind('#');
    return pos == std::string::npos ? id : id.substr(0, pos);
  };
  std::vector<Passage> kept;
  for (const Passage& p : collection.passages()) {
    std::uint64_t state = mix64(seed, fnv1a(doc_key(p.id)));
    if (unit_real(splitmix64(state)) < fraction) kept.push_back(p);
  }
  return PassageCollection::from_passages(std::move(kept));
}

}  // namespace hyret
