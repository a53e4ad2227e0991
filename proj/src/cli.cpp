#include "hyret/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyret/corpus.hpp"
#include "hyret/datagen.hpp"
#include "hyret/dense.hpp"
#include "hyret/eval.hpp"
#include "hyret/io.hpp"
#include "hyret/pairs.hpp"
#include "hyret/search.hpp"
#include "hyret/sparse.hpp"
#include "hyret/text.hpp"

namespace hyret {
namespace {

namespace fs = std::filesystem;

std::string digest_hex(const fs::path& path) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(file_digest(path)));
  return std::string("fnv1a:") + buf;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Every artifact-producing command records how the artifact was made in
// <artifact>.manifest.json. No timestamps: reruns with the same flags must be
// byte-identical.
void write_manifest(const std::string& command, const nlohmann::json& args,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs) {
  nlohmann::json m;
  m["tool"] = "hyret";
  m["version"] = std::string(kToolVersion);
  m["command"] = command;
  m["args"] = args;
  m["inputs"] = nlohmann::json::object();
  m["outputs"] = nlohmann::json::object();
  for (const fs::path& p : inputs) m["inputs"][p.string()] = digest_hex(p);
  for (const fs::path& p : outputs) m["outputs"][p.string()] = digest_hex(p);
  const fs::path manifest_path = outputs.front().string() + ".manifest.json";
  std::ofstream f(manifest_path);
  if (!f) throw std::runtime_error("cannot write manifest: " + manifest_path.string());
  f << m.dump(2) << '\n';
}

int cmd_ingest(const std::string& corpus, const std::string& out, std::size_t max_tokens) {
  PassageCollection collection = ingest(corpus, max_tokens);
  save_collection(collection, out);
  std::size_t tokens = 0;
  for (const Passage& p : collection.passages()) tokens += p.tokens.size();
  std::cout << "passages " << collection.size() << '\n' << "tokens " << tokens << '\n';
  write_manifest("ingest", {{"max_tokens", max_tokens}}, {corpus}, {out});
  return 0;
}

int cmd_gendata(const std::string& collection_path, const std::string& out,
                const std::string& method, const std::string& external, double fraction,
                std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("fraction must be in (0, 1]");
  if (!external.empty() && method != "qgen")
    throw std::invalid_argument("--external applies only to --method=qgen");

  PassageCollection full = load_collection(collection_path);
  PassageCollection working = subsample_corpus(full, fraction, seed);
  GenConfig cfg;
  cfg.seed = seed;

  std::vector<TrainingPair> pairs;
  std::size_t masked = 0, ict_total = 0;
  if (method == "ict") {
    for (const Passage& p : working.passages()) {
      std::mt19937_64 rng = passage_rng(seed, p.id);
      for (IctSample& sample : gen_ict(p, cfg, rng)) {
        masked += sample.masked ? 1 : 0;
        ++ict_total;
        pairs.push_back(std::move(sample.pair));
      }
    }
  } else if (method == "ngram") {
    for (const Passage& p : working.passages())
      for (TrainingPair& pair : gen_ngram(p, cfg)) pairs.push_back(std::move(pair));
  } else if (method == "qgen") {
    if (!external.empty()) {
      // External questions are validated against the full collection, then
      // restricted to the subsample so training matches the index contents.
      for (TrainingPair& pair : load_external_pairs(external, full))
        if (working.find(pair.passage_id) != nullptr) pairs.push_back(std::move(pair));
    } else {
      if (working.empty()) throw std::runtime_error("subsample left no passages to generate from");
      const CollectionStats& stats = working.stats();
      for (const Passage& p : working.passages())
        for (TrainingPair& pair : gen_questions(p, stats, cfg)) pairs.push_back(std::move(pair));
    }
  } else {
    throw std::invalid_argument("unknown method \"" + method + "\"");
  }

  write_pairs(out, pairs);
  std::cout << "pairs " << pairs.size() << '\n';
  if (method == "ict") {
    const double rate =
        ict_total == 0 ? 0.0 : static_cast<double>(masked) / static_cast<double>(ict_total);
    std::cout << "masked_fraction " << fixed6(rate) << '\n';
  }

  nlohmann::json args{{"method", method}, {"fraction", fraction}, {"seed", seed}};
  std::vector<fs::path> inputs{collection_path};
  if (!external.empty()) {
    args["external"] = external;
    inputs.push_back(external);
  }
  write_manifest("gendata", args, inputs, {out});
  return 0;
}

int cmd_train(const std::string& pairs_path, const std::string& collection_path,
              const std::string& out, std::uint32_t dim, std::uint32_t batch, double lr,
              std::uint32_t epochs, std::uint64_t seed) {
  std::vector<TrainingPair> pairs = read_pairs(pairs_path);
  PassageCollection collection = load_collection(collection_path);
  TrainConfig cfg;
  cfg.batch_size = batch;
  cfg.learning_rate = lr;
  cfg.epochs = epochs;
  cfg.seed = seed;

  std::vector<double> losses;
  EncoderModel model =
      train(EncoderModel(dim, EncoderModel::kDefaultBuckets, seed), pairs, collection, cfg,
            &losses);
  model.save(out);

  std::cout << "pairs " << pairs.size() << '\n';
  for (std::size_t e = 0; e < losses.size(); ++e)
    std::cout << "epoch_loss " << e + 1 << ' ' << fixed6(losses[e]) << '\n';
  if (!losses.empty()) std::cout << "final_loss " << fixed6(losses.back()) << '\n';

  write_manifest("train",
                 {{"dim", dim},
                  {"batch", batch},
                  {"lr", lr},
                  {"epochs", epochs},
                  {"seed", seed}},
                 {pairs_path, collection_path}, {out});
  return 0;
}

int cmd_index(const std::string& collection_path, const std::string& out,
              const std::string& model_path, std::uint32_t shards) {
  PassageCollection collection = load_collection(collection_path);
  std::optional<EncoderModel> model;
  std::string model_ref;
  if (!model_path.empty()) {
    model = EncoderModel::load(model_path);
    model_ref = digest_hex(model_path);
  }
  const CollectionStats stats = collection.empty() ? CollectionStats{} : collection.stats();
  HybridIndex index = build_index(collection, stats, Bm25Params{},
                                  model ? &*model : nullptr, shards, model_ref);
  save_index(index, out);

  std::cout << "passages " << index.size() << '\n'
            << "shards " << index.shard_count() << '\n'
            << "dim " << index.dim() << '\n';

  nlohmann::json args{{"shards", shards}};
  std::vector<fs::path> inputs{collection_path};
  if (!model_path.empty()) {
    args["model"] = model_path;
    inputs.push_back(model_path);
  }
  write_manifest("index", args, inputs, {out});
  return 0;
}

int cmd_search(const std::string& index_path, const std::string& queries_path,
               const std::string& out, const std::string& model_path, double lambda,
               std::size_t k, const std::string& tag) {
  HybridIndex index = load_index(index_path);
  std::optional<EncoderModel> model;
  if (!model_path.empty()) model = EncoderModel::load(model_path);

  std::ifstream f(queries_path);
  if (!f) throw std::runtime_error("cannot open query file: " + queries_path);
  Run run;
  run.tag = tag;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(queries_path + " line " + std::to_string(lineno) +
                               ": expected \"query_id<TAB>query text\"");
    std::string qid = line.substr(0, tab);
    if (qid.empty())
      throw std::runtime_error(queries_path + " line " + std::to_string(lineno) +
                               ": empty query id");
    std::vector<Token> query = tokenize(line.substr(tab + 1));
    std::vector<ScoredHit> hits = index.retrieve(query, model ? &*model : nullptr, lambda, k);
    std::vector<RunEntry> entries;
    entries.reserve(hits.size());
    for (ScoredHit& h : hits) entries.push_back({std::move(h.passage_id), h.score});
    if (!run.ranked.emplace(std::move(qid), std::move(entries)).second)
      throw std::runtime_error(queries_path + " line " + std::to_string(lineno) +
                               ": duplicate query id");
  }
  write_run(run, out);
  std::cout << "queries " << run.ranked.size() << '\n';

  nlohmann::json args{{"lambda", lambda}, {"k", k}, {"tag", tag}};
  std::vector<fs::path> inputs{index_path, queries_path};
  if (!model_path.empty()) {
    args["model"] = model_path;
    inputs.push_back(model_path);
  }
  write_manifest("search", args, inputs, {out});
  return 0;
}

int cmd_eval(const std::string& run_path, const std::string& qrels_path, std::size_t map_cutoff,
             const std::string& compare, std::uint32_t perm_rounds, std::uint64_t seed) {
  Run run = read_run(run_path);
  Qrels qrels = read_qrels(qrels_path);
  EvalConfig cfg;
  cfg.map_cutoff = map_cutoff;
  MetricReport report = evaluate_run(run, qrels, cfg);

  for (const std::string& qid : report.skipped_no_judgments)
    std::cerr << "warning: query " << qid << " has no judgments; skipped\n";
  for (const std::string& qid : report.skipped_no_relevant)
    std::cerr << "warning: query " << qid << " has no relevant passages; skipped\n";

  const std::vector<std::string> keys = {"map", "p10", "ndcg10", "mrr", "p1"};
  std::cout << "queries " << report.query_ids.size() << '\n';
  for (const std::string& key : keys)
    std::cout << key << ' ' << fixed6(report.mean.at(key)) << '\n';

  if (!compare.empty()) {
    Run other = read_run(compare);
    MetricReport other_report = evaluate_run(other, qrels, cfg);
    // Pair per-query values over the queries both runs evaluated.
    std::vector<std::size_t> left, right;
    {
      std::size_t i = 0, j = 0;
      const auto& a = report.query_ids;
      const auto& b = other_report.query_ids;
      while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
          ++i;
        } else if (b[j] < a[i]) {
          ++j;
        } else {
          left.push_back(i++);
          right.push_back(j++);
        }
      }
    }
    if (left.empty()) {
      std::cerr << "warning: no common evaluated queries; skipping significance test\n";
      return 0;
    }
    for (const std::string& key : keys) {
      std::vector<double> a, b;
      a.reserve(left.size());
      b.reserve(left.size());
      for (std::size_t idx : left) a.push_back(report.per_query.at(key)[idx]);
      for (std::size_t idx : right) b.push_back(other_report.per_query.at(key)[idx]);
      std::cout << "p_" << key << ' ' << fixed6(permutation_test(a, b, perm_rounds, seed))
                << '\n';
    }
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"hybrid sparse-dense passage retrieval at desk scale"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  auto* c_ingest = app.add_subcommand("ingest", "chunk a corpus into a passage collection");
  std::string ingest_corpus, ingest_out;
  std::size_t max_tokens = 200;
  c_ingest->add_option("corpus", ingest_corpus, "newline-delimited JSON corpus")->required();
  c_ingest->add_option("out", ingest_out, "collection file to write")->required();
  c_ingest->add_option("--max-tokens", max_tokens, "token budget per passage chunk")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* c_gendata = app.add_subcommand("gendata", "generate synthetic training pairs");
  std::string gen_collection, gen_out, gen_method, gen_external;
  double gen_fraction = 1.0;
  std::uint64_t gen_seed = 0;
  c_gendata->add_option("collection", gen_collection, "ingested collection")->required();
  c_gendata->add_option("out", gen_out, "pairs file to write")->required();
  c_gendata->add_option("--method", gen_method, "ict, ngram, or qgen")
      ->required()
      ->check(CLI::IsMember({"ict", "ngram", "qgen"}));
  c_gendata->add_option("--external", gen_external,
                        "external question file (qgen only; stand-in generator otherwise)");
  c_gendata->add_option("--fraction", gen_fraction, "corpus subsample fraction")
      ->capture_default_str();
  c_gendata->add_option("--seed", gen_seed, "generator seed")->capture_default_str();

  auto* c_train = app.add_subcommand("train", "train the dense encoder on pairs");
  std::string train_pairs, train_collection, train_out;
  std::uint32_t train_dim = 64, train_batch = 64, train_epochs = 5;
  double train_lr = 0.05;
  std::uint64_t train_seed = 0;
  c_train->add_option("pairs", train_pairs, "training pairs file")->required();
  c_train->add_option("collection", train_collection, "ingested collection")->required();
  c_train->add_option("out", train_out, "checkpoint file to write")->required();
  c_train->add_option("--dim", train_dim, "encoder dimension")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_train->add_option("--batch", train_batch, "batch size")->capture_default_str();
  c_train->add_option("--lr", train_lr, "learning rate")->capture_default_str();
  c_train->add_option("--epochs", train_epochs, "training epochs")->capture_default_str();
  c_train->add_option("--seed", train_seed, "initialization and shuffling seed")
      ->capture_default_str();

  auto* c_index = app.add_subcommand("index", "build the hybrid index for a collection");
  std::string index_collection, index_out, index_model;
  std::uint32_t index_shards = 4;
  c_index->add_option("collection", index_collection, "ingested collection")->required();
  c_index->add_option("out", index_out, "index file to write")->required();
  c_index->add_option("--model", index_model, "encoder checkpoint (sparse-only when omitted)");
  c_index->add_option("--shards", index_shards, "parallel scan partitions")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* c_search = app.add_subcommand("search", "run queries against an index");
  std::string search_index, search_queries, search_out, search_model, search_tag = "hyret";
  double search_lambda = 1.0;
  std::size_t search_k = 100;
  c_search->add_option("index", search_index, "index file")->required();
  c_search->add_option("queries", search_queries, "query file (query_id<TAB>text)")->required();
  c_search->add_option("out", search_out, "run file to write")->required();
  c_search->add_option("--model", search_model, "encoder checkpoint for dense queries");
  c_search->add_option("--lambda", search_lambda, "sparse interpolation weight")
      ->capture_default_str();
  c_search->add_option("--k", search_k, "results per query")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_search->add_option("--tag", search_tag, "run tag")->capture_default_str();

  auto* c_eval = app.add_subcommand("eval", "score a run against qrels");
  std::string eval_run, eval_qrels, eval_compare;
  std::size_t eval_cutoff = 100;
  std::uint32_t eval_rounds = 10000;
  std::uint64_t eval_seed = 0;
  c_eval->add_option("run", eval_run, "TREC run file")->required();
  c_eval->add_option("qrels", eval_qrels, "TREC qrels file")->required();
  c_eval->add_option("--map-cutoff", eval_cutoff, "MAP evaluation depth")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_eval->add_option("--compare", eval_compare, "second run for the significance test");
  c_eval->add_option("--perm-rounds", eval_rounds, "permutation rounds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_eval->add_option("--seed", eval_seed, "permutation seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest_corpus, ingest_out, max_tokens);
    if (c_gendata->parsed())
      return cmd_gendata(gen_collection, gen_out, gen_method, gen_external, gen_fraction,
                         gen_seed);
    if (c_train->parsed())
      return cmd_train(train_pairs, train_collection, train_out, train_dim, train_batch,
                       train_lr, train_epochs, train_seed);
    if (c_index->parsed()) return cmd_index(index_collection, index_out, index_model, index_shards);
    if (c_search->parsed())
      return cmd_search(search_index, search_queries, search_out, search_model, search_lambda,
                        search_k, search_tag);
    if (c_eval->parsed())
      return cmd_eval(eval_run, eval_qrels, eval_cutoff, eval_compare, eval_rounds, eval_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace hyret
