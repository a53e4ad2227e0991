#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hyret/corpus.hpp"
#include "hyret/dense.hpp"
#include "hyret/sparse.hpp"

namespace hyret {

struct ScoredHit {
  std::string passage_id;
  double score = 0.0;
  double sparse_part = 0.0;
  double dense_part = 0.0;
};

// Immutable exact-search index over hybrid vectors. Sparse sides are stored
// CSR-style with interned term ids; dense sides sit in one contiguous array.
// Passages are partitioned round-robin into shards (passage i -> shard i mod
// S) and retrieval fans the scan across shards, so results are independent of
// the shard count.
class HybridIndex {
 public:
  HybridIndex() = default;
  // Direct assembly from prebuilt per-passage vectors. dense must be empty
  // per passage when dim == 0, else of length dim.
  HybridIndex(std::vector<std::string> ids, std::vector<SparseVector> sparse,
              std::vector<DenseVector> dense, std::uint32_t dim, CollectionStats stats,
              Bm25Params params, std::uint32_t shards, std::string model_ref = {});

  std::size_t size() const { return ids_.size(); }
  std::uint32_t dim() const { return dim_; }  // 0 when sparse-only
  std::uint32_t shard_count() const { return shards_; }
  std::size_t shard_size(std::uint32_t shard) const;
  const Bm25Params& params() const { return params_; }
  const CollectionStats& stats() const { return stats_; }
  const std::string& model_ref() const { return model_ref_; }
  const std::vector<std::string>& passage_ids() const { return ids_; }

  // Materialized copies of a stored passage vector (serialization, tests).
  SparseVector sparse_vector(std::size_t i) const;
  DenseVector dense_vector(std::size_t i) const;

  // Scores every passage and returns the top k by score descending, ties by
  // passage id ascending. model is required iff the index stores dense
  // vectors. Parallel over shards; bit-identical for any shard count.
  std::vector<ScoredHit> retrieve(std::span<const Token> query, const EncoderModel* model,
                                  double lambda, std::size_t k) const;
  // Serial full-scan oracle with the identical contract; kept as the
  // reference for the sharded path.
  std::vector<ScoredHit> retrieve_reference(std::span<const Token> query,
                                            const EncoderModel* model, double lambda,
                                            std::size_t k) const;

 private:
  struct Candidate {
    double score;
    double sparse_part;
    double dense_part;
    std::size_t index;
  };
  void check_query(const EncoderModel* model, double lambda, std::size_t k) const;
  // Query views: weight per interned term id, plus the encoded dense query.
  std::vector<double> query_weights(std::span<const Token> query) const;
  Candidate score_one(std::size_t i, const std::vector<double>& qweights,
                      const DenseVector& qdense, double lambda) const;
  bool better(const Candidate& a, const Candidate& b) const;
  std::vector<ScoredHit> finalize(std::vector<Candidate> candidates, std::size_t k) const;

  std::vector<std::string> ids_;
  std::vector<Token> terms_;                       // term id -> term
  std::unordered_map<Token, std::uint32_t> term_ids_;
  std::vector<std::size_t> offsets_;               // size() + 1
  std::vector<std::uint32_t> postings_;            // term ids, CSR
  std::vector<double> weights_;                    // aligned with postings_
  std::vector<double> dense_;                      // size() * dim_
  std::uint32_t dim_ = 0;
  std::uint32_t shards_ = 1;
  CollectionStats stats_;
  Bm25Params params_;
  std::string model_ref_;
};

// Encodes every passage (sparse always, dense when model is given) and
// partitions round-robin. stats must be the snapshot the sparse encodings use.
HybridIndex build_index(const PassageCollection& collection, const CollectionStats& stats,
                        const Bm25Params& params, const EncoderModel* model,
                        std::uint32_t shards, std::string model_ref = {});

void save_index(const HybridIndex& index, const std::filesystem::path& path);
HybridIndex load_index(const std::filesystem::path& path);

}  // namespace hyret
