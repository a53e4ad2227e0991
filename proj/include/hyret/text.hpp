#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hyret {

// Lowercased term; never empty, never contains whitespace.
using Token = std::string;

struct Sentence {
  std::string text;
  std::size_t token_count = 0;
};

struct Chunk {
  std::string title;
  std::string text;
};

// Lowercases and splits on maximal runs of non-alphanumeric characters.
// Bytes >= 0x80 are kept as token characters so UTF-8 words survive intact.
std::vector<Token> tokenize(std::string_view text);

// Token count without materializing the tokens.
std::size_t count_tokens(std::string_view text);

// Splits after '.', '?' or '!' followed by whitespace or end-of-string.
// Sentence texts are trimmed; token_count is the tokenizer's length on text.
std::vector<Sentence> split_sentences(std::string_view text);

// Prefix of text covering its first `budget` tokens.
std::string truncate_tokens(std::string_view text, std::size_t budget);

// Greedily packs whole sentences into chunks of at most
// max_tokens - count_tokens(title) tokens. A single sentence over the budget
// becomes its own chunk, truncated. Throws if the title leaves no room.
std::vector<Chunk> chunk_passage(const std::string& title, const std::string& body,
                                 std::size_t max_tokens);

}  // namespace hyret
