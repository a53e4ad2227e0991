#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hyret/text.hpp"

namespace hyret {

// TREC qrels: grade per (query, passage); absent pairs are non-relevant.
using QueryGrades = std::map<std::string, int>;  // passage id -> grade
using Qrels = std::map<std::string, QueryGrades>;

struct RunEntry {
  std::string passage_id;
  double score = 0.0;
};

// A ranked run, normalized so that per query entries are ordered by score
// descending with ties broken by passage id ascending.
struct Run {
  std::string tag = "hyret";
  std::map<std::string, std::vector<RunEntry>> ranked;
};

// "query_id 0 passage_id grade" lines; parse errors name the line.
Qrels read_qrels(const std::filesystem::path& path);
void write_qrels(const Qrels& qrels, const std::filesystem::path& path);

// "query_id Q0 passage_id rank score tag" lines; scores are re-sorted into
// the normalized order on read, duplicates per query are an error.
Run read_run(const std::filesystem::path& path);
// Ranks are re-assigned 1..L; scores print with six decimal places.
void write_run(const Run& run, const std::filesystem::path& path);

// Sorts entries into the normalized order (score desc, passage id asc).
void normalize_ranking(std::vector<RunEntry>& entries);

// Rank metrics over one query. All treat grade > 0 as relevant; the three
// that need at least one relevant entry in grades throw std::invalid_argument
// otherwise.
double average_precision(const std::vector<RunEntry>& ranked, const QueryGrades& grades,
                         std::size_t cutoff);
double precision_at(const std::vector<RunEntry>& ranked, const QueryGrades& grades,
                    std::size_t k);
double ndcg_at(const std::vector<RunEntry>& ranked, const QueryGrades& grades, std::size_t k);
double reciprocal_rank(const std::vector<RunEntry>& ranked, const QueryGrades& grades);

// Mean reciprocal rank over the run's queries that have at least one relevant
// passage in qrels.
double mrr(const Run& run, const Qrels& qrels);

// Clipped n-gram F1 and LCS-based F1.
double rouge_n(std::span<const Token> candidate, std::span<const Token> reference, int n);
double rouge_l(std::span<const Token> candidate, std::span<const Token> reference);

// Paired two-sided randomization test on per-query differences. Statistic is
// |mean(a - b)|; each round flips each pair's sign with probability 1/2;
// p = (1 + #{rounds >= observed}) / (rounds + 1). Deterministic per seed and
// independent of thread count.
double permutation_test(std::span<const double> a, std::span<const double> b,
                        std::uint32_t rounds, std::uint64_t seed);

struct EvalConfig {
  std::size_t map_cutoff = 100;
  std::size_t precision_k = 10;
  std::size_t ndcg_k = 10;
};

// Metric keys used in MetricReport: "map", "p10", "ndcg10", "mrr", "p1"
// (the numeric suffixes follow EvalConfig, fixed to the defaults here).
struct MetricReport {
  std::vector<std::string> query_ids;  // evaluated queries, ascending
  std::map<std::string, std::vector<double>> per_query;  // metric -> values per query_ids
  std::map<std::string, double> mean;                    // metric -> mean (0 when no queries)
  std::vector<std::string> skipped_no_judgments;  // run queries absent from qrels
  std::vector<std::string> skipped_no_relevant;   // judged queries with zero relevant
};

MetricReport evaluate_run(const Run& run, const Qrels& qrels, const EvalConfig& config);

}  // namespace hyret
