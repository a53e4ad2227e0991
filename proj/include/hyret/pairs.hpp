#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hyret/corpus.hpp"
#include "hyret/text.hpp"

namespace hyret {

enum class PairSource { Ict, Ngram, QGen, External };

std::string to_string(PairSource source);
PairSource pair_source_from_string(const std::string& name);

// One unit of weak supervision: a synthetic question and its source passage.
struct TrainingPair {
  std::vector<Token> question;
  std::string passage_id;
  PairSource source = PairSource::Ict;
};

// Newline-delimited JSON {"question", "passage_id", "source"}. Question tokens
// are space-joined on write and re-tokenized on read (tokenize is idempotent
// on its own joined output).
void write_pairs(const std::filesystem::path& path, const std::vector<TrainingPair>& pairs);
std::vector<TrainingPair> read_pairs(const std::filesystem::path& path);

}  // namespace hyret
