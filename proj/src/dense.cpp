#include "hyret/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "hyret/io.hpp"

namespace hyret {

EncoderModel::EncoderModel(std::uint32_t dim, std::uint64_t buckets, std::uint64_t seed)
    : dim_(dim), buckets_(buckets), init_seed_(seed) {
  if (dim == 0) throw std::invalid_argument("encoder dimension must be positive");
  if (buckets == 0) throw std::invalid_argument("bucket count must be positive");
  projection_.resize(static_cast<std::size_t>(dim) * dim);
  std::mt19937_64 rng(mix64(seed, 0x5737u));
  std::uniform_real_distribution<double> dist(-kInitRange, kInitRange);
  for (double& w : projection_) w = dist(rng);
}

std::uint64_t EncoderModel::bucket_of(const Token& token) const {
  return fnv1a(token) % buckets_;
}

void EncoderModel::init_row(std::uint64_t bucket, double* out) const {
  // Counter-based derivation: independent of touch order and thread count.
  std::uint64_t state = mix64(mix64(init_seed_, 0xE5B0u), bucket);
  for (std::uint32_t d = 0; d < dim_; ++d)
    out[d] = (unit_real(splitmix64(state)) * 2.0 - 1.0) * kInitRange;
}

DenseVector EncoderModel::embedding(std::uint64_t bucket) const {
  auto it = embeddings_.find(bucket);
  if (it != embeddings_.end()) return it->second;
  DenseVector row(dim_);
  init_row(bucket, row.data());
  return row;
}

std::vector<double>& EncoderModel::mutable_embedding(std::uint64_t bucket) {
  auto it = embeddings_.find(bucket);
  if (it == embeddings_.end()) {
    std::vector<double> row(dim_);
    init_row(bucket, row.data());
    it = embeddings_.emplace(bucket, std::move(row)).first;
  }
  return it->second;
}

namespace {

// Mean-pooled bucket embeddings; zero vector for empty input. Accumulation
// runs in bucket order so permuting the input cannot change even the
// floating-point rounding.
void pool(const EncoderModel& model, std::span<const Token> tokens, double* out) {
  const std::uint32_t dim = model.dim();
  std::fill(out, out + dim, 0.0);
  if (tokens.empty()) return;
  std::map<std::uint64_t, std::uint32_t> counts;
  for (const Token& t : tokens) ++counts[model.bucket_of(t)];
  DenseVector row;
  for (const auto& [bucket, count] : counts) {
    row = model.embedding(bucket);
    for (std::uint32_t d = 0; d < dim; ++d) out[d] += row[d] * count;
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (std::uint32_t d = 0; d < dim; ++d) out[d] *= inv;
}

void project(const std::vector<double>& w, std::uint32_t dim, const double* h, double* out) {
  for (std::uint32_t r = 0; r < dim; ++r) {
    double acc = 0.0;
    const double* row = w.data() + static_cast<std::size_t>(r) * dim;
    for (std::uint32_t c = 0; c < dim; ++c) acc += row[c] * h[c];
    out[r] = acc;
  }
}

double dot(const double* a, const double* b, std::uint32_t n) {
  double acc = 0.0;
  for (std::uint32_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

DenseVector EncoderModel::encode(std::span<const Token> tokens) const {
  DenseVector pooled(dim_), out(dim_);
  pool(*this, tokens, pooled.data());
  project(projection_, dim_, pooled.data(), out.data());
  return out;
}

double sim(const DenseVector& q, const DenseVector& p) {
  if (q.size() != p.size())
    throw std::invalid_argument("sim: dimension mismatch (" + std::to_string(q.size()) +
                                " vs " + std::to_string(p.size()) + ")");
  return dot(q.data(), p.data(), static_cast<std::uint32_t>(q.size()));
}

namespace {

struct BatchState {
  std::size_t size = 0;
  std::uint32_t dim = 0;
  std::vector<double> hq, hp;  // pooled inputs, size B x dim
  std::vector<double> q, p;    // projected encodings, size B x dim
  std::vector<double> scores;  // B x B, scores[i*B+j] = <q_i, p_j>
  std::vector<double> losses;  // per query
};

BatchState forward(const EncoderModel& model, const TrainingBatch& batch) {
  BatchState s;
  s.size = batch.size();
  s.dim = model.dim();
  const std::size_t b = s.size, dim = s.dim;
  s.hq.resize(b * dim);
  s.hp.resize(b * dim);
  s.q.resize(b * dim);
  s.p.resize(b * dim);
  s.scores.resize(b * b);
  s.losses.resize(b);

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < b; ++i) {
    pool(model, batch[i].query, s.hq.data() + i * dim);
    pool(model, batch[i].passage, s.hp.data() + i * dim);
    project(model.projection(), s.dim, s.hq.data() + i * dim, s.q.data() + i * dim);
    project(model.projection(), s.dim, s.hp.data() + i * dim, s.p.data() + i * dim);
  }

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < b; ++i) {
    const double* qi = s.q.data() + i * dim;
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b; ++j) {
      double v = dot(qi, s.p.data() + j * dim, s.dim);
      s.scores[i * b + j] = v;
      max_score = std::max(max_score, v);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < b; ++j) sum += std::exp(s.scores[i * b + j] - max_score);
    s.losses[i] = max_score + std::log(sum) - s.scores[i * b + i];
  }
  return s;
}

double mean_loss(const BatchState& s) {
  if (s.size == 0) return 0.0;
  double total = 0.0;
  for (double l : s.losses) total += l;
  return total / static_cast<double>(s.size);
}

}  // namespace

double batch_loss(const EncoderModel& model, const TrainingBatch& batch) {
  if (batch.empty()) return 0.0;
  return mean_loss(forward(model, batch));
}

BatchGradients batch_gradients(const EncoderModel& model, const TrainingBatch& batch) {
  BatchGradients g;
  const std::uint32_t dim = model.dim();
  g.projection.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  if (batch.empty()) return g;

  BatchState s = forward(model, batch);
  const std::size_t b = s.size;
  g.loss = mean_loss(s);

  // dL/ds_ij = (softmax_ij - delta_ij) / B
  std::vector<double> gs(b * b);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < b; ++i) {
    double max_score = *std::max_element(s.scores.begin() + i * b, s.scores.begin() + (i + 1) * b);
    double denom = 0.0;
    for (std::size_t j = 0; j < b; ++j) denom += std::exp(s.scores[i * b + j] - max_score);
    for (std::size_t j = 0; j < b; ++j) {
      double soft = std::exp(s.scores[i * b + j] - max_score) / denom;
      gs[i * b + j] = (soft - (i == j ? 1.0 : 0.0)) / static_cast<double>(b);
    }
  }

  // dL/dq_i = sum_j gs_ij p_j ; dL/dp_j = sum_i gs_ij q_i
  std::vector<double> dq(b * dim, 0.0), dp(b * dim, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < b; ++i) {
    double* out = dq.data() + i * dim;
    for (std::size_t j = 0; j < b; ++j) {
      const double w = gs[i * b + j];
      const double* pj = s.p.data() + j * dim;
      for (std::uint32_t d = 0; d < dim; ++d) out[d] += w * pj[d];
    }
  }
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < b; ++j) {
    double* out = dp.data() + j * dim;
    for (std::size_t i = 0; i < b; ++i) {
      const double w = gs[i * b + j];
      const double* qi = s.q.data() + i * dim;
      for (std::uint32_t d = 0; d < dim; ++d) out[d] += w * qi[d];
    }
  }

  // dW[r][c] = sum_i dq_i[r] hq_i[c] + sum_j dp_j[r] hp_j[c]
#pragma omp parallel for schedule(static)
  for (std::uint32_t r = 0; r < dim; ++r) {
    double* row = g.projection.data() + static_cast<std::size_t>(r) * dim;
    for (std::size_t i = 0; i < b; ++i) {
      const double a = dq[i * dim + r];
      const double c2 = dp[i * dim + r];
      const double* hqi = s.hq.data() + i * dim;
      const double* hpi = s.hp.data() + i * dim;
      for (std::uint32_t c = 0; c < dim; ++c) row[c] += a * hqi[c] + c2 * hpi[c];
    }
  }

  // Backprop through the projection and mean pooling into bucket rows.
  // Accumulation stays serial so results do not depend on thread count.
  std::vector<double> dh(b * 2 * dim);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < b; ++i) {
    const std::vector<double>& w = model.projection();
    double* dhq = dh.data() + i * 2 * dim;
    double* dhp = dhq + dim;
    for (std::uint32_t c = 0; c < dim; ++c) {
      double aq = 0.0, ap = 0.0;
      for (std::uint32_t r = 0; r < dim; ++r) {
        aq += w[static_cast<std::size_t>(r) * dim + c] * dq[i * dim + r];
        ap += w[static_cast<std::size_t>(r) * dim + c] * dp[i * dim + r];
      }
      dhq[c] = aq;
      dhp[c] = ap;
    }
  }
  auto scatter = [&](const std::vector<Token>& tokens, const double* grad) {
    if (tokens.empty()) return;
    const double inv = 1.0 / static_cast<double>(tokens.size());
    for (const Token& t : tokens) {
      auto [it, inserted] = g.embeddings.try_emplace(model.bucket_of(t));
      if (inserted) it->second.assign(dim, 0.0);
      for (std::uint32_t d = 0; d < dim; ++d) it->second[d] += inv * grad[d];
    }
  };
  for (std::size_t i = 0; i < b; ++i) {
    scatter(batch[i].query, dh.data() + i * 2 * dim);
    scatter(batch[i].passage, dh.data() + i * 2 * dim + dim);
  }
  return g;
}

EncoderModel train(EncoderModel model, const std::vector<TrainingPair>& pairs,
                   const PassageCollection& collection, const TrainConfig& config,
                   std::vector<double>* epoch_losses) {
  if (config.batch_size < 2)
    throw std::invalid_argument("in-batch negatives require batch >= 2");
  for (const TrainingPair& p : pairs)
    if (collection.find(p.passage_id) == nullptr)
      throw std::runtime_error("training pair references unknown passage id \"" +
                               p.passage_id + "\"");
  model.set_trained_config(config);

  const std::size_t b = config.batch_size;
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::mt19937_64 rng(mix64(config.seed, epoch));
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start + b <= order.size(); start += b) {
      TrainingBatch batch;
      batch.reserve(b);
      for (std::size_t i = start; i < start + b; ++i) {
        const TrainingPair& pair = pairs[order[i]];
        batch.push_back({pair.question, collection.find(pair.passage_id)->tokens});
      }
      BatchGradients g = batch_gradients(model, batch);
      const double lr = config.learning_rate;
      std::vector<double>& w = model.projection();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g.projection[i];
      for (const auto& [bucket, grad] : g.embeddings) {
        std::vector<double>& row = model.mutable_embedding(bucket);
        for (std::uint32_t d = 0; d < model.dim(); ++d) row[d] -= lr * grad[d];
      }
      loss_sum += g.loss;
      ++batches;
    }
    if (epoch_losses)
      epoch_losses->push_back(batches == 0 ? 0.0 : loss_sum / static_cast<double>(batches));
  }
  return model;
}

namespace {
constexpr std::string_view kModelMagic = "HYRM";
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

void EncoderModel::save(const std::filesystem::path& path) const {
  ByteWriter w;
  w.u32(dim_);
  w.u64(buckets_);
  w.u64(init_seed_);
  w.u32(trained_config_.batch_size);
  w.f64(trained_config_.learning_rate);
  w.u32(trained_config_.epochs);
  w.u64(trained_config_.seed);
  std::vector<std::uint64_t> keys;
  keys.reserve(embeddings_.size());
  for (const auto& [bucket, _] : embeddings_) keys.push_back(bucket);
  std::sort(keys.begin(), keys.end());
  w.u64(keys.size());
  for (std::uint64_t bucket : keys) {
    w.u64(bucket);
    for (double v : embeddings_.at(bucket)) w.f64(v);
  }
  for (double v : projection_) w.f64(v);
  w.write_file(path, kModelMagic, kModelVersion);
}

EncoderModel EncoderModel::load(const std::filesystem::path& path) {
  ByteReader r(path, kModelMagic, kModelVersion);
  std::uint32_t dim = r.u32();
  std::uint64_t buckets = r.u64();
  std::uint64_t seed = r.u64();
  EncoderModel model(dim, buckets, seed);
  TrainConfig cfg;
  cfg.batch_size = r.u32();
  cfg.learning_rate = r.f64();
  cfg.epochs = r.u32();
  cfg.seed = r.u64();
  model.trained_config_ = cfg;
  std::uint64_t entries = r.u64();
  for (std::uint64_t i = 0; i < entries; ++i) {
    std::uint64_t bucket = r.u64();
    std::vector<double> row(dim);
    for (double& v : row) v = r.f64();
    model.embeddings_[bucket] = std::move(row);
  }
  for (double& v : model.projection_) v = r.f64();
  if (!r.done()) throw std::runtime_error("trailing bytes in checkpoint: " + path.string());
  return model;
}

}  // namespace hyret
