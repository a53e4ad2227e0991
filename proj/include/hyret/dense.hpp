#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "hyret/corpus.hpp"
#include "hyret/pairs.hpp"
#include "hyret/text.hpp"

namespace hyret {

using DenseVector = std::vector<double>;

struct TrainConfig {
  std::uint32_t batch_size = 64;
  double learning_rate = 0.05;
  std::uint32_t epochs = 5;
  std::uint64_t seed = 0;
};

// Siamese bag-of-terms encoder: tokens hash into H buckets, bucket embeddings
// are mean-pooled and passed through a shared square projection. The same
// parameters encode queries and passages.
//
// Bucket embeddings are materialized lazily; untouched buckets are derived
// from the init seed on demand, so checkpoints only store trained rows.
class EncoderModel {
 public:
  EncoderModel(std::uint32_t dim, std::uint64_t buckets, std::uint64_t seed);

  static constexpr std::uint64_t kDefaultBuckets = 1ull << 18;
  static constexpr double kInitRange = 0.05;

  std::uint32_t dim() const { return dim_; }
  std::uint64_t buckets() const { return buckets_; }
  std::uint64_t init_seed() const { return init_seed_; }
  const TrainConfig& trained_config() const { return trained_config_; }
  void set_trained_config(const TrainConfig& cfg) { trained_config_ = cfg; }

  std::uint64_t bucket_of(const Token& token) const;

  // Embedding row for a bucket: the trained value if present, otherwise the
  // deterministic initialization.
  DenseVector embedding(std::uint64_t bucket) const;
  // Materializes the row for update; returns a mutable reference.
  std::vector<double>& mutable_embedding(std::uint64_t bucket);
  std::size_t stored_embeddings() const { return embeddings_.size(); }

  std::vector<double>& projection() { return projection_; }
  const std::vector<double>& projection() const { return projection_; }

  DenseVector encode(std::span<const Token> tokens) const;

  void save(const std::filesystem::path& path) const;
  static EncoderModel load(const std::filesystem::path& path);

 private:
  void init_row(std::uint64_t bucket, double* out) const;

  std::uint32_t dim_;
  std::uint64_t buckets_;
  std::uint64_t init_seed_;
  std::unordered_map<std::uint64_t, std::vector<double>> embeddings_;
  std::vector<double> projection_;  // dim x dim, row-major
  TrainConfig trained_config_;
};

// Dot product; throws on length mismatch.
double sim(const DenseVector& q, const DenseVector& p);

struct BatchItem {
  std::vector<Token> query;
  std::vector<Token> passage;
};
using TrainingBatch = std::vector<BatchItem>;

// Mean over queries of log-sum-exp(scores) - score(positive), with in-batch
// passages as the candidate set.
double batch_loss(const EncoderModel& model, const TrainingBatch& batch);

struct BatchGradients {
  double loss = 0.0;
  std::vector<double> projection;                       // dim x dim
  std::map<std::uint64_t, std::vector<double>> embeddings;  // touched buckets only
};
BatchGradients batch_gradients(const EncoderModel& model, const TrainingBatch& batch);

// Plain SGD over shuffled batches; the final partial batch is dropped.
// Deterministic for a fixed seed. Per-epoch mean losses are appended to
// epoch_losses when provided.
EncoderModel train(EncoderModel model, const std::vector<TrainingPair>& pairs,
                   const PassageCollection& collection, const TrainConfig& config,
                   std::vector<double>* epoch_losses = nullptr);

}  // namespace hyret
