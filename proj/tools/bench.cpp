// Compares the serial reference scan against the sharded parallel scan on a
// synthetic corpus, for sparse-only and hybrid indexes.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyret/corpus.hpp"
#include "hyret/dense.hpp"
#include "hyret/io.hpp"
#include "hyret/search.hpp"

using namespace hyret;

namespace {

std::vector<Token> random_tokens(std::mt19937_64& rng, std::size_t count, std::size_t vocab) {
  std::uniform_int_distribution<std::size_t> pick(0, vocab - 1);
  std::vector<Token> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back("w" + std::to_string(pick(rng)));
  return out;
}

std::string join(const std::vector<Token>& tokens) {
  std::string text;
  for (const Token& t : tokens) {
    if (!text.empty()) text.push_back(' ');
    text += t;
  }
  return text;
}

double run_queries(const HybridIndex& index, const std::vector<std::vector<Token>>& queries,
                   const EncoderModel* model, std::size_t k, bool reference,
                   double* checksum) {
  const auto start = std::chrono::steady_clock::now();
  for (const auto& q : queries) {
    const auto hits = reference ? index.retrieve_reference(q, model, 1.0, k)
                                : index.retrieve(q, model, 1.0, k);
    for (const auto& h : hits) *checksum += h.score;
  }
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t passages = 10000;
  std::size_t queries = 50;
  std::size_t vocab = 2000;
  std::uint32_t dim = 64;
  std::size_t k = 100;

  CLI::App app{"scan benchmark: serial reference vs sharded parallel retrieval"};
  app.add_option("--passages", passages)->capture_default_str();
  app.add_option("--queries", queries)->capture_default_str();
  app.add_option("--vocab", vocab)->capture_default_str();
  app.add_option("--dim", dim)->capture_default_str();
  app.add_option("--k", k)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 rng(7);
  std::vector<Passage> ps;
  ps.reserve(passages);
  for (std::size_t i = 0; i < passages; ++i)
    ps.push_back(
        Passage::make("p" + std::to_string(i), std::nullopt, join(random_tokens(rng, 40, vocab))));
  PassageCollection collection = PassageCollection::from_passages(std::move(ps));

  std::vector<std::vector<Token>> qs;
  qs.reserve(queries);
  for (std::size_t i = 0; i < queries; ++i) qs.push_back(random_tokens(rng, 8, vocab));

  EncoderModel model(dim, EncoderModel::kDefaultBuckets, 7);
  std::printf("passages=%zu queries=%zu vocab=%zu dim=%u k=%zu\n", passages, queries, vocab, dim,
              k);

  for (const bool dense : {false, true}) {
    const EncoderModel* m = dense ? &model : nullptr;
    HybridIndex base = build_index(collection, collection.stats(), Bm25Params{}, m, 1);
    std::printf("%s index\n", dense ? "hybrid" : "sparse-only");
    double checksum = 0.0;
    const double ref_ms = run_queries(base, qs, m, k, /*reference=*/true, &checksum);
    std::printf("  reference serial     %9.2f ms total  %7.3f ms/query\n", ref_ms,
                ref_ms / static_cast<double>(queries));
    for (const std::uint32_t shards : {1u, 2u, 4u, 8u}) {
      HybridIndex index = build_index(collection, collection.stats(), Bm25Params{}, m, shards);
      double sharded_sum = 0.0;
      const double ms = run_queries(index, qs, m, k, /*reference=*/false, &sharded_sum);
      std::printf("  parallel shards=%-2u   %9.2f ms total  %7.3f ms/query%s\n", shards, ms,
                  ms / static_cast<double>(queries),
                  sharded_sum == checksum ? "" : "  [MISMATCH vs reference]");
    }
  }
  return 0;
}
