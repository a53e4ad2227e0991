#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "hyret/corpus.hpp"
#include "hyret/pairs.hpp"
#include "hyret/text.hpp"

namespace hyret {

struct GenConfig {
  int ict_max_sentences = 5;
  double ict_mask_rate = 0.9;
  int ngram_n = 16;
  int ngram_stride = 8;
  int salient_top_k = 5;
  std::uint64_t seed = 0;
};

// Input truncation for the passage-level question generator call.
inline constexpr std::size_t kQgenTokenBudget = 512;

struct IctSample {
  TrainingPair pair;
  std::vector<Token> effective_passage;  // positive tokens after optional masking
  bool masked = false;
};

// Samples up to ict_max_sentences distinct sentences as pseudo-queries; each
// positive independently drops the selected sentence with probability
// ict_mask_rate.
std::vector<IctSample> gen_ict(const Passage& passage, const GenConfig& cfg,
                               std::mt19937_64& rng);

// Sliding token windows at offsets 0, stride, 2*stride, ...; windows shorter
// than the stride are dropped unless they are the only window.
std::vector<TrainingPair> gen_ngram(const Passage& passage, const GenConfig& cfg);

// Top-k sentences by the maximum IDF over their tokens, ties broken by
// earlier position.
std::vector<Sentence> salient_sentences(const Passage& passage, const CollectionStats& stats,
                                        int k);

// Deterministic question stand-in: "what is known about" followed by the top
// five IDF terms of the input, in order of first appearance.
std::vector<Token> standin_question(std::span<const Token> input, const CollectionStats& stats);

// One question from the (truncated) full passage plus one per salient
// sentence; exact-duplicate questions for the passage are removed.
std::vector<TrainingPair> gen_questions(const Passage& passage, const CollectionStats& stats,
                                        const GenConfig& cfg);

// Newline-delimited JSON {"question", "passage_id"}; questions pass through a
// generator trained elsewhere. Unknown passage ids are an error.
std::vector<TrainingPair> load_external_pairs(const std::filesystem::path& path,
                                              const PassageCollection& collection);

// Keeps each source document (all chunks sharing the id prefix before '#')
// with an independent seeded draw; chunk groups are never split.
PassageCollection subsample_corpus(const PassageCollection& collection, double fraction,
                                   std::uint64_t seed);

// Per-passage generator RNG; derived so passages can be processed in any
// order or in parallel with identical output.
std::mt19937_64 passage_rng(std::uint64_t seed, const std::string& passage_id);

}  // namespace hyret
