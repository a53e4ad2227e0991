#include "hyret/sparse.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace hyret {

namespace {

std::unordered_map<Token, std::uint32_t> term_counts(std::span<const Token> tokens) {
  std::unordered_map<Token, std::uint32_t> counts;
  counts.reserve(tokens.size());
  for (const Token& t : tokens) ++counts[t];
  return counts;
}

// Saturated term-frequency factor: cnt*(k+1) / (cnt + k*(1 - b + b*m/m_avg)).
double tf_factor(double cnt, double passage_len, const CollectionStats& stats,
                 const Bm25Params& params) {
  const double norm = params.k * (1.0 - params.b + params.b * passage_len / stats.avg_len);
  return cnt * (params.k + 1.0) / (cnt + norm);
}

}  // namespace

SparseVector::SparseVector(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  for (auto& e : entries) {
    if (!entries_.empty() && entries_.back().first == e.first)
      entries_.back().second += e.second;
    else
      entries_.push_back(std::move(e));
  }
  std::erase_if(entries_, [](const Entry& e) { return e.second == 0.0; });
}

double SparseVector::at(const Token& term) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), term,
                             [](const Entry& e, const Token& t) { return e.first < t; });
  return it != entries_.end() && it->first == term ? it->second : 0.0;
}

double bm25_direct(std::span<const Token> query, const Passage& passage,
                   const CollectionStats& stats, const Bm25Params& params) {
  if (stats.doc_count == 0) throw std::invalid_argument("bm25_direct: empty collection stats");
  const auto counts = term_counts(passage.tokens);
  const double m = static_cast<double>(passage.tokens.size());
  double score = 0.0;
  for (const Token& q : query) {
    auto it = counts.find(q);
    if (it == counts.end()) continue;
    score += idf(stats, q) * tf_factor(it->second, m, stats, params);
  }
  return score;
}

SparseVector encode_query_sparse(std::span<const Token> query) {
  std::vector<SparseVector::Entry> entries;
  for (const auto& [term, cnt] : term_counts(query))
    entries.emplace_back(term, static_cast<double>(cnt));
  return SparseVector(std::move(entries));
}

SparseVector encode_passage_sparse(const Passage& passage, const CollectionStats& stats,
                                   const Bm25Params& params) {
  if (stats.doc_count == 0)
    throw std::invalid_argument("encode_passage_sparse: empty collection stats");
  const double m = static_cast<double>(passage.tokens.size());
  std::vector<SparseVector::Entry> entries;
  for (const auto& [term, cnt] : term_counts(passage.tokens))
    entries.emplace_back(term, idf(stats, term) * tf_factor(cnt, m, stats, params));
  return SparseVector(std::move(entries));
}

double dot_sparse(const SparseVector& u, const SparseVector& v) {
  double sum = 0.0;
  auto a = u.begin(), b = v.begin();
  while (a != u.end() && b != v.end()) {
    if (a->first < b->first)
      ++a;
    else if (b->first < a->first)
      ++b;
    else {
      sum += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return sum;
}

}  // namespace hyret
