#include "hyret/text.hpp"

#include <cctype>
#include <stdexcept>

namespace hyret {

namespace {

bool is_token_char(unsigned char c) {
  return c >= 0x80 || std::isalnum(c) != 0;
}

bool is_space(unsigned char c) { return c < 0x80 && std::isspace(c) != 0; }

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && !is_token_char(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < n && is_token_char(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      Token t;
      t.reserve(j - i);
      for (std::size_t k = i; k < j; ++k)
        t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[k]))));
      out.push_back(std::move(t));
    }
    i = j;
  }
  return out;
}

std::size_t count_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (unsigned char c : text) {
    bool tc = is_token_char(c);
    if (tc && !in_token) ++count;
    in_token = tc;
  }
  return count;
}

std::vector<Sentence> split_sentences(std::string_view text) {
  std::vector<Sentence> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    std::string_view piece = trim(text.substr(start, end - start));
    if (!piece.empty()) out.push_back({std::string(piece), count_tokens(piece)});
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if ((c == '.' || c == '?' || c == '!') &&
        (i + 1 == text.size() || is_space(static_cast<unsigned char>(text[i + 1])))) {
      emit(i + 1);
    }
  }
  emit(text.size());
  return out;
}

std::string truncate_tokens(std::string_view text, std::size_t budget) {
  if (budget == 0) return {};
  std::size_t count = 0;
  bool in_token = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    bool tc = is_token_char(static_cast<unsigned char>(text[i]));
    if (tc && !in_token) ++count;
    if (!tc && in_token && count == budget) return std::string(text.substr(0, i));
    in_token = tc;
  }
  return std::string(text);
}

std::vector<Chunk> chunk_passage(const std::string& title, const std::string& body,
                                 std::size_t max_tokens) {
  if (max_tokens == 0) throw std::invalid_argument("max_tokens must be >= 1");
  const std::size_t title_tokens = count_tokens(title);
  if (title_tokens >= max_tokens)
    throw std::invalid_argument("title alone fills the token budget (" +
                                std::to_string(title_tokens) + " tokens, budget " +
                                std::to_string(max_tokens) + ")");
  const std::size_t budget = max_tokens - title_tokens;

  std::vector<Chunk> chunks;
  std::string current;
  std::size_t current_tokens = 0;
  auto flush = [&] {
    if (current_tokens > 0) chunks.push_back({title, std::move(current)});
    current.clear();
    current_tokens = 0;
  };
  for (const Sentence& s : split_sentences(body)) {
    if (current_tokens > 0 && current_tokens + s.token_count > budget) flush();
    if (s.token_count > budget) {
      // Oversized sentence: its own chunk, cut down to the budget.
      chunks.push_back({title, truncate_tokens(s.text, budget)});
      continue;
    }
    if (!current.empty()) current.push_back(' ');
    current += s.text;
    current_tokens += s.token_count;
  }
  flush();
  return chunks;
}

}  // namespace hyret
