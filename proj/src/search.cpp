#include "hyret/search.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "hyret/io.hpp"

namespace hyret {

namespace {
constexpr std::string_view kIndexMagic = "HYRI";
constexpr std::uint32_t kIndexVersion = 1;
}  // namespace

HybridIndex::HybridIndex(std::vector<std::string> ids, std::vector<SparseVector> sparse,
                         std::vector<DenseVector> dense, std::uint32_t dim,
                         CollectionStats stats, Bm25Params params, std::uint32_t shards,
                         std::string model_ref)
    : ids_(std::move(ids)),
      dim_(dim),
      shards_(shards),
      stats_(std::move(stats)),
      params_(params),
      model_ref_(std::move(model_ref)) {
  if (shards_ < 1) throw std::invalid_argument("shard count must be at least 1");
  if (sparse.size() != ids_.size() || dense.size() != ids_.size())
    throw std::invalid_argument("per-passage vector counts disagree with id count");

  offsets_.reserve(ids_.size() + 1);
  offsets_.push_back(0);
  for (const SparseVector& v : sparse) {
    for (const auto& [term, weight] : v) {
      auto [it, inserted] = term_ids_.try_emplace(term, static_cast<std::uint32_t>(terms_.size()));
      if (inserted) terms_.push_back(term);
      postings_.push_back(it->second);
      weights_.push_back(weight);
    }
    offsets_.push_back(postings_.size());
  }

  dense_.resize(ids_.size() * static_cast<std::size_t>(dim_));
  for (std::size_t i = 0; i < dense.size(); ++i) {
    const DenseVector& row = dense[i];
    if (row.size() != dim_)
      throw std::invalid_argument("dense vector length disagrees with index dimension");
    std::copy(row.begin(), row.end(), dense_.begin() + static_cast<std::ptrdiff_t>(i * dim_));
  }
}

std::size_t HybridIndex::shard_size(std::uint32_t shard) const {
  if (shard >= shards_) throw std::out_of_range("shard out of range");
  return (ids_.size() + shards_ - 1 - shard) / shards_;
}

SparseVector HybridIndex::sparse_vector(std::size_t i) const {
  std::vector<SparseVector::Entry> entries;
  for (std::size_t j = offsets_[i]; j < offsets_[i + 1]; ++j)
    entries.emplace_back(terms_[postings_[j]], weights_[j]);
  return SparseVector(std::move(entries));
}

DenseVector HybridIndex::dense_vector(std::size_t i) const {
  const auto begin = dense_.begin() + static_cast<std::ptrdiff_t>(i * dim_);
  return DenseVector(begin, begin + dim_);
}

void HybridIndex::check_query(const EncoderModel* model, double lambda, std::size_t k) const {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
  if (model && dim_ == 0)
    throw std::runtime_error("encoder model supplied for a sparse-only index");
  if (!model && dim_ > 0)
    throw std::runtime_error("index stores dense vectors; an encoder model is required");
  if (model && model->dim() != dim_)
    throw std::runtime_error("encoder dimension " + std::to_string(model->dim()) +
                             " does not match index dimension " + std::to_string(dim_));
}

std::vector<double> HybridIndex::query_weights(std::span<const Token> query) const {
  std::vector<double> qweights(terms_.size(), 0.0);
  for (const auto& [term, weight] : encode_query_sparse(query)) {
    auto it = term_ids_.find(term);
    // Terms unseen at build time cannot match any stored posting.
    if (it != term_ids_.end()) qweights[it->second] = weight;
  }
  return qweights;
}

HybridIndex::Candidate HybridIndex::score_one(std::size_t i, const std::vector<double>& qweights,
                                              const DenseVector& qdense, double lambda) const {
  double sparse_part = 0.0;
  for (std::size_t j = offsets_[i]; j < offsets_[i + 1]; ++j)
    sparse_part += qweights[postings_[j]] * weights_[j];
  double dense_part = 0.0;
  if (dim_ > 0) {
    const double* row = dense_.data() + i * dim_;
    for (std::uint32_t d = 0; d < dim_; ++d) dense_part += qdense[d] * row[d];
  }
  return {lambda * sparse_part + dense_part, sparse_part, dense_part, i};
}

bool HybridIndex::better(const Candidate& a, const Candidate& b) const {
  if (a.score != b.score) return a.score > b.score;
  return ids_[a.index] < ids_[b.index];
}

std::vector<ScoredHit> HybridIndex::finalize(std::vector<Candidate> candidates,
                                             std::size_t k) const {
  std::sort(candidates.begin(), candidates.end(),
            [this](const Candidate& a, const Candidate& b) { return better(a, b); });
  if (candidates.size() > k) candidates.resize(k);
  std::vector<ScoredHit> hits;
  hits.reserve(candidates.size());
  for (const Candidate& c : candidates)
    hits.push_back({ids_[c.index], c.score, c.sparse_part, c.dense_part});
  return hits;
}

std::vector<ScoredHit> HybridIndex::retrieve(std::span<const Token> query,
                                             const EncoderModel* model, double lambda,
                                             std::size_t k) const {
  check_query(model, lambda, k);
  const std::vector<double> qweights = query_weights(query);
  const DenseVector qdense = model ? model->encode(query) : DenseVector{};

  // Each shard gathers its own top k; the merged pool then contains the
  // global top k because score/id ordering is a strict total order.
  const auto worse_first = [this](const Candidate& a, const Candidate& b) {
    return better(a, b);
  };
  std::vector<std::vector<Candidate>> shard_top(shards_);
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(shards_); ++s) {
    std::vector<Candidate>& heap = shard_top[static_cast<std::size_t>(s)];
    for (std::size_t i = static_cast<std::size_t>(s); i < ids_.size(); i += shards_) {
      Candidate c = score_one(i, qweights, qdense, lambda);
      if (heap.size() < k) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end(), worse_first);
      } else if (better(c, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), worse_first);
        heap.back() = c;
        std::push_heap(heap.begin(), heap.end(), worse_first);
      }
    }
  }

  std::vector<Candidate> pool;
  for (const auto& heap : shard_top) pool.insert(pool.end(), heap.begin(), heap.end());
  return finalize(std::move(pool), k);
}

std::vector<ScoredHit> HybridIndex::retrieve_reference(std::span<const Token> query,
                                                       const EncoderModel* model, double lambda,
                                                       std::size_t k) const {
  check_query(model, lambda, k);
  const std::vector<double> qweights = query_weights(query);
  const DenseVector qdense = model ? model->encode(query) : DenseVector{};
  std::vector<Candidate> all;
  all.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i)
    all.push_back(score_one(i, qweights, qdense, lambda));
  return finalize(std::move(all), k);
}

HybridIndex build_index(const PassageCollection& collection, const CollectionStats& stats,
                        const Bm25Params& params, const EncoderModel* model,
                        std::uint32_t shards, std::string model_ref) {
  if (shards < 1) throw std::invalid_argument("shard count must be at least 1");
  const auto& passages = collection.passages();
  std::vector<std::string> ids(passages.size());
  std::vector<SparseVector> sparse(passages.size());
  const std::uint32_t dim = model ? model->dim() : 0;
  std::vector<DenseVector> dense(passages.size(), DenseVector(dim));

#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(passages.size()); ++i) {
    const Passage& p = passages[static_cast<std::size_t>(i)];
    ids[i] = p.id;
    sparse[i] = encode_passage_sparse(p, stats, params);
    if (model) dense[i] = model->encode(p.tokens);
  }
  return HybridIndex(std::move(ids), std::move(sparse), std::move(dense), dim, stats, params,
                     shards, std::move(model_ref));
}

void save_index(const HybridIndex& index, const std::filesystem::path& path) {
  ByteWriter w;
  w.u32(index.dim());
  w.u32(index.shard_count());
  w.f64(index.params().k);
  w.f64(index.params().b);
  w.str(index.model_ref());

  const CollectionStats& stats = index.stats();
  w.u64(stats.doc_count);
  w.f64(stats.avg_len);
  std::map<Token, std::uint32_t> sorted_df(stats.df.begin(), stats.df.end());
  w.u64(sorted_df.size());
  for (const auto& [term, df] : sorted_df) {
    w.str(term);
    w.u32(df);
  }

  w.u64(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    w.str(index.passage_ids()[i]);
    const SparseVector v = index.sparse_vector(i);
    w.u64(v.size());
    for (const auto& [term, weight] : v) {
      w.str(term);
      w.f64(weight);
    }
    if (index.dim() > 0)
      for (double x : index.dense_vector(i)) w.f64(x);
  }
  w.write_file(path, kIndexMagic, kIndexVersion);
}

HybridIndex load_index(const std::filesystem::path& path) {
  ByteReader r(path, kIndexMagic, kIndexVersion);
  const std::uint32_t dim = r.u32();
  const std::uint32_t shards = r.u32();
  Bm25Params params;
  params.k = r.f64();
  params.b = r.f64();
  std::string model_ref = r.str();

  CollectionStats stats;
  stats.doc_count = r.u64();
  stats.avg_len = r.f64();
  const std::uint64_t df_count = r.u64();
  for (std::uint64_t i = 0; i < df_count; ++i) {
    std::string term = r.str();
    const std::uint32_t df = r.u32();
    stats.df.emplace(std::move(term), df);
  }

  const std::uint64_t passage_count = r.u64();
  std::vector<std::string> ids;
  std::vector<SparseVector> sparse;
  std::vector<DenseVector> dense;
  ids.reserve(passage_count);
  sparse.reserve(passage_count);
  dense.reserve(passage_count);
  for (std::uint64_t i = 0; i < passage_count; ++i) {
    ids.push_back(r.str());
    const std::uint64_t nnz = r.u64();
    std::vector<SparseVector::Entry> entries;
    entries.reserve(nnz);
    for (std::uint64_t j = 0; j < nnz; ++j) {
      std::string term = r.str();
      const double weight = r.f64();
      entries.emplace_back(std::move(term), weight);
    }
    sparse.emplace_back(std::move(entries));
    DenseVector row(dim);
    for (std::uint32_t d = 0; d < dim; ++d) row[d] = r.f64();
    dense.push_back(std::move(row));
  }
  if (!r.done()) throw std::runtime_error(path.string() + ": trailing bytes after index payload");
  return HybridIndex(std::move(ids), std::move(sparse), std::move(dense), dim, std::move(stats),
                     params, shards, std::move(model_ref));
}

}  // namespace hyret
