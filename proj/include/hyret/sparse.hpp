#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyret/corpus.hpp"

namespace hyret {

struct Bm25Params {
  double k = 1.2;
  double b = 0.75;
};

// Term -> weight map kept as a sorted vector. Zero weights are never stored.
class SparseVector {
 public:
  using Entry = std::pair<Token, double>;

  SparseVector() = default;
  // Sorts by term, sums duplicate terms, drops zero weights.
  explicit SparseVector(std::vector<Entry> entries);

  double at(const Token& term) const;  // 0.0 when absent
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::vector<Entry> entries_;
};

// The BM25 sum over query token occurrences; repeated query terms contribute
// once per occurrence.
double bm25_direct(std::span<const Token> query, const Passage& passage,
                   const CollectionStats& stats, const Bm25Params& params);

// Query-side encoding: weight equals the term's multiplicity in the query, so
// that dot_sparse(query, passage) reproduces bm25_direct exactly.
SparseVector encode_query_sparse(std::span<const Token> query);

// Passage-side encoding: per-term saturated tf * idf weights.
SparseVector encode_passage_sparse(const Passage& passage, const CollectionStats& stats,
                                   const Bm25Params& params);

double dot_sparse(const SparseVector& u, const SparseVector& v);

}  // namespace hyret
