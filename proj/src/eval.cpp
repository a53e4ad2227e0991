#include "hyret/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "hyret/io.hpp"

namespace hyret {

namespace {

[[noreturn]] void line_error(const std::filesystem::path& path, std::size_t lineno,
                             const std::string& what) {
  throw std::runtime_error(path.string() + " line " + std::to_string(lineno) + ": " + what);
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::size_t relevant_count(const QueryGrades& grades) {
  std::size_t n = 0;
  for (const auto& [pid, grade] : grades)
    if (grade > 0) ++n;
  return n;
}

int grade_of(const QueryGrades& grades, const std::string& pid) {
  auto it = grades.find(pid);
  return it == grades.end() ? 0 : it->second;
}

}  // namespace

Qrels read_qrels(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open qrels file: " + path.string());
  Qrels qrels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (blank(line)) continue;
    std::istringstream ss(line);
    std::string qid, iteration, pid;
    long long grade = 0;
    if (!(ss >> qid >> iteration >> pid >> grade))
      line_error(path, lineno, "expected \"query_id 0 passage_id grade\"");
    std::string rest;
    if (ss >> rest) line_error(path, lineno, "unexpected trailing field \"" + rest + "\"");
    if (grade < 0) line_error(path, lineno, "negative relevance grade");
    if (!qrels[qid].emplace(pid, static_cast<int>(grade)).second)
      line_error(path, lineno, "duplicate judgment for (" + qid + ", " + pid + ")");
  }
  return qrels;
}

void write_qrels(const Qrels& qrels, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write qrels file: " + path.string());
  for (const auto& [qid, grades] : qrels)
    for (const auto& [pid, grade] : grades) f << qid << " 0 " << pid << ' ' << grade << '\n';
}

void normalize_ranking(std::vector<RunEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const RunEntry& a, const RunEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.passage_id < b.passage_id;
  });
}

Run read_run(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open run file: " + path.string());
  Run run;
  std::unordered_map<std::string, std::unordered_set<std::string>> seen;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(f, line)) {
    ++lineno;
    if (blank(line)) continue;
    std::istringstream ss(line);
    std::string qid, q0, pid, tag;
    long long rank = 0;
    double score = 0.0;
    if (!(ss >> qid >> q0 >> pid >> rank >> score >> tag))
      line_error(path, lineno, "expected \"query_id Q0 passage_id rank score tag\"");
    std::string rest;
    if (ss >> rest) line_error(path, lineno, "unexpected trailing field \"" + rest + "\"");
    if (rank < 1) line_error(path, lineno, "rank must be positive");
    if (!seen[qid].insert(pid).second)
      line_error(path, lineno, "duplicate passage " + pid + " for query " + qid);
    if (first) {
      run.tag = tag;
      first = false;
    }
    run.ranked[qid].push_back({pid, score});
  }
  for (auto& [qid, entries] : run.ranked) normalize_ranking(entries);
  return run;
}

void write_run(const Run& run, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write run file: " + path.string());
  char score_buf[64];
  for (const auto& [qid, entries] : run.ranked) {
    std::vector<RunEntry> ordered = entries;
    normalize_ranking(ordered);
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      std::snprintf(score_buf, sizeof score_buf, "%.6f", ordered[i].score);
      f << qid << " Q0 " << ordered[i].passage_id << ' ' << i + 1 << ' ' << score_buf << ' '
        << run.tag << '\n';
    }
  }
}

double average_precision(const std::vector<RunEntry>& ranked, const QueryGrades& grades,
                         std::size_t cutoff) {
  const std::size_t total_relevant = relevant_count(grades);
  if (total_relevant == 0) throw std::invalid_argument("query has no relevant passages");
  std::size_t hits = 0;
  double sum = 0.0;
  const std::size_t depth = std::min(cutoff, ranked.size());
  for (std::size_t i = 0; i < depth; ++i) {
    if (grade_of(grades, ranked[i].passage_id) > 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(total_relevant);
}

double precision_at(const std::vector<RunEntry>& ranked, const QueryGrades& grades,
                    std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i)
    if (grade_of(grades, ranked[i].passage_id) > 0) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double ndcg_at(const std::vector<RunEntry>& ranked, const QueryGrades& grades, std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (relevant_count(grades) == 0) throw std::invalid_argument("query has no relevant passages");
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i)
    dcg += grade_of(grades, ranked[i].passage_id) / std::log2(static_cast<double>(i + 2));
  std::vector<int> ideal;
  ideal.reserve(grades.size());
  for (const auto& [pid, grade] : grades) ideal.push_back(grade);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, ideal.size()); ++i)
    idcg += ideal[i] / std::log2(static_cast<double>(i + 2));
  return dcg / idcg;
}

double reciprocal_rank(const std::vector<RunEntry>& ranked, const QueryGrades& grades) {
  for (std::size_t i = 0; i < ranked.size(); ++i)
    if (grade_of(grades, ranked[i].passage_id) > 0) return 1.0 / static_cast<double>(i + 1);
  return 0.0;
}

double mrr(const Run& run, const Qrels& qrels) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [qid, entries] : run.ranked) {
    auto it = qrels.find(qid);
    if (it == qrels.end() || relevant_count(it->second) == 0) continue;
    sum += reciprocal_rank(entries, it->second);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

namespace {

std::unordered_map<std::string, std::size_t> ngram_counts(std::span<const Token> tokens, int n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (tokens.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (int j = 0; j < n; ++j) {
      key += tokens[i + j];
      key.push_back('\x1f');
    }
    ++counts[key];
  }
  return counts;
}

double f1(double precision, double recall) {
  const double denom = precision + recall;
  return denom == 0.0 ? 0.0 : 2.0 * precision * recall / denom;
}

}  // namespace

double rouge_n(std::span<const Token> candidate, std::span<const Token> reference, int n) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  const auto cand = ngram_counts(candidate, n);
  const auto ref = ngram_counts(reference, n);
  if (cand.empty() || ref.empty()) return 0.0;
  std::size_t cand_total = 0, ref_total = 0, overlap = 0;
  for (const auto& [key, count] : cand) cand_total += count;
  for (const auto& [key, count] : ref) ref_total += count;
  for (const auto& [key, count] : cand) {
    auto it = ref.find(key);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  return f1(static_cast<double>(overlap) / static_cast<double>(cand_total),
            static_cast<double>(overlap) / static_cast<double>(ref_total));
}

double rouge_l(std::span<const Token> candidate, std::span<const Token> reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  // Two-row LCS table.
  std::vector<std::size_t> prev(reference.size() + 1, 0), cur(reference.size() + 1, 0);
  for (std::size_t i = 1; i <= candidate.size(); ++i) {
    for (std::size_t j = 1; j <= reference.size(); ++j) {
      cur[j] = candidate[i - 1] == reference[j - 1] ? prev[j - 1] + 1
                                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev[reference.size()]);
  return f1(lcs / static_cast<double>(candidate.size()),
            lcs / static_cast<double>(reference.size()));
}

double permutation_test(std::span<const double> a, std::span<const double> b,
                        std::uint32_t rounds, std::uint64_t seed) {
  if (a.size() != b.size())
    throw std::invalid_argument("paired samples must have equal lengths");
  if (a.empty()) throw std::invalid_argument("paired samples must be non-empty");
  if (rounds < 1) throw std::invalid_argument("rounds must be at least 1");

  std::vector<double> diffs(a.size());
  double observed_sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diffs[i] = a[i] - b[i];
    observed_sum += diffs[i];
  }
  const double n = static_cast<double>(diffs.size());
  const double observed = std::abs(observed_sum / n);

  std::uint64_t at_least = 0;
  // Per-round derived RNG stream keeps the count independent of scheduling.
#pragma omp parallel for schedule(static) reduction(+ : at_least)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(rounds); ++r) {
    std::uint64_t state = mix64(seed, static_cast<std::uint64_t>(r));
    double sum = 0.0;
    for (double d : diffs) {
      const std::uint64_t bits = splitmix64(state);
      sum += (bits >> 63) ? -d : d;
    }
    if (std::abs(sum / n) >= observed) ++at_least;
  }
  return static_cast<double>(1 + at_least) / static_cast<double>(rounds + 1);
}

MetricReport evaluate_run(const Run& run, const Qrels& qrels, const EvalConfig& config) {
  MetricReport report;
  const std::string p_key = "p" + std::to_string(config.precision_k);
  const std::string ndcg_key = "ndcg" + std::to_string(config.ndcg_k);
  const std::vector<std::string> keys = {"map", p_key, ndcg_key, "mrr", "p1"};
  for (const std::string& key : keys) {
    report.per_query[key];
    report.mean[key] = 0.0;
  }

  for (const auto& [qid, entries] : run.ranked) {
    auto it = qrels.find(qid);
    if (it == qrels.end()) {
      report.skipped_no_judgments.push_back(qid);
      continue;
    }
    const QueryGrades& grades = it->second;
    if (relevant_count(grades) == 0) {
      report.skipped_no_relevant.push_back(qid);
      continue;
    }
    report.query_ids.push_back(qid);
    report.per_query["map"].push_back(average_precision(entries, grades, config.map_cutoff));
    report.per_query[p_key].push_back(precision_at(entries, grades, config.precision_k));
    report.per_query[ndcg_key].push_back(ndcg_at(entries, grades, config.ndcg_k));
    report.per_query["mrr"].push_back(reciprocal_rank(entries, grades));
    report.per_query["p1"].push_back(precision_at(entries, grades, 1));
  }

  for (const std::string& key : keys) {
    const std::vector<double>& values = report.per_query[key];
    if (values.empty()) continue;
    double sum = 0.0;
    for (double v : values) sum += v;
    report.mean[key] = sum / static_cast<double>(values.size());
  }
  return report;
}

}  // namespace hyret
