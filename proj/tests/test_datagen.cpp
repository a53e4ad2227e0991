#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>

#include "hyret/corpus.hpp"
#include "hyret/datagen.hpp"
#include "hyret/pairs.hpp"

using namespace hyret;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("hyret_datagen_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string join(const std::vector<Token>& tokens) {
  std::string out;
  for (const Token& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

Passage ngram_passage(std::size_t token_count) {
  std::vector<Token> tokens;
  for (std::size_t i = 0; i < token_count; ++i) tokens.push_back("w" + std::to_string(i));
  return Passage::make("p", std::nullopt, join(tokens));
}

}  // namespace

TEST_CASE("gen_ict on a one-sentence passage") {
  const Passage p = Passage::make("p", "Title Words", "Only one sentence here.");
  GenConfig cfg;
  cfg.ict_mask_rate = 1.0;  // force masking
  std::mt19937_64 rng(1);
  const auto samples = gen_ict(p, cfg, rng);
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].pair.question == std::vector<Token>{"only", "one", "sentence", "here"});
  CHECK(samples[0].pair.passage_id == "p");
  CHECK(samples[0].pair.source == PairSource::Ict);
  CHECK(samples[0].masked);
  // masked positive keeps only the title
  CHECK(samples[0].effective_passage == std::vector<Token>{"title", "words"});
}

TEST_CASE("gen_ict caps selection at five distinct sentences") {
  const Passage p = Passage::make(
      "p", std::nullopt, "One a. Two b. Three c. Four d. Five e. Six f. Seven g.");
  GenConfig cfg;
  std::mt19937_64 rng(2);
  const auto samples = gen_ict(p, cfg, rng);
  REQUIRE(samples.size() == 5);
  std::set<std::string> questions;
  for (const auto& s : samples) questions.insert(join(s.pair.question));
  CHECK(questions.size() == 5);  // distinct sentences
}

TEST_CASE("gen_ict mask_rate 0 never alters the positive") {
  const Passage p = Passage::make("p", "t", "First one. Second two. Third three.");
  GenConfig cfg;
  cfg.ict_mask_rate = 0.0;
  std::mt19937_64 rng(3);
  for (const auto& s : gen_ict(p, cfg, rng)) {
    CHECK(!s.masked);
    CHECK(s.effective_passage == p.tokens);
  }
}

TEST_CASE("gen_ict mask_rate 1 removes the query sentence from its positive") {
  const Passage p = Passage::make("p", "t", "First alpha. Second beta. Third gamma.");
  GenConfig cfg;
  cfg.ict_mask_rate = 1.0;
  std::mt19937_64 rng(4);
  for (const auto& s : gen_ict(p, cfg, rng)) {
    CHECK(s.masked);
    // the distinctive second token of the query sentence must be gone
    const Token marker = s.pair.question[1];
    CHECK(std::find(s.effective_passage.begin(), s.effective_passage.end(), marker) ==
          s.effective_passage.end());
    // but the other sentences' tokens remain
    CHECK(s.effective_passage.size() == p.tokens.size() - s.pair.question.size());
  }
}

TEST_CASE("gen_ict skips token-less sentences") {
  const Passage p = Passage::make("p", std::nullopt, "!!! . Real words here.");
  GenConfig cfg;
  std::mt19937_64 rng(5);
  const auto samples = gen_ict(p, cfg, rng);
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].pair.question == std::vector<Token>{"real", "words", "here"});
}

TEST_CASE("gen_ict is deterministic given the same rng state") {
  const Passage p = Passage::make(
      "p", std::nullopt, "One a. Two b. Three c. Four d. Five e. Six f. Seven g.");
  GenConfig cfg;
  std::mt19937_64 r1(9), r2(9);
  const auto a = gen_ict(p, cfg, r1);
  const auto b = gen_ict(p, cfg, r2);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].pair.question == b[i].pair.question);
    CHECK(a[i].masked == b[i].masked);
    CHECK(a[i].effective_passage == b[i].effective_passage);
  }
}

TEST_CASE("gen_ngram window enumeration") {
  GenConfig cfg;  // n = 16, stride = 8

  const auto w24 = gen_ngram(ngram_passage(24), cfg);
  REQUIRE(w24.size() == 3);  // [0,16), [8,24), [16,24)
  CHECK(w24[0].question.size() == 16);
  CHECK(w24[0].question.front() == "w0");
  CHECK(w24[1].question.front() == "w8");
  CHECK(w24[1].question.back() == "w23");
  CHECK(w24[2].question == std::vector<Token>{"w16", "w17", "w18", "w19", "w20", "w21", "w22",
                                              "w23"});
  for (const auto& pair : w24) CHECK(pair.source == PairSource::Ngram);

  const auto w16 = gen_ngram(ngram_passage(16), cfg);
  REQUIRE(w16.size() == 2);  // [0,16), [8,16)
  CHECK(w16[1].question.size() == 8);

  const auto w5 = gen_ngram(ngram_passage(5), cfg);
  REQUIRE(w5.size() == 1);  // sole short window kept
  CHECK(w5[0].question.size() == 5);

  // short tail windows are dropped when other windows exist
  const auto w17 = gen_ngram(ngram_passage(17), cfg);
  REQUIRE(w17.size() == 2);  // [0,16), [8,17); [16,17) is 1 < stride
  CHECK(w17[1].question.size() == 9);

  CHECK(gen_ngram(ngram_passage(0), cfg).empty());
}

TEST_CASE("gen_ngram with stride = n partitions the prefix") {
  GenConfig cfg;
  cfg.ngram_n = 4;
  cfg.ngram_stride = 4;
  const Passage p = ngram_passage(13);
  const auto pairs = gen_ngram(p, cfg);
  std::vector<Token> flattened;
  for (const auto& pair : pairs)
    flattened.insert(flattened.end(), pair.question.begin(), pair.question.end());
  // 13 = 3 full windows + a 1-token tail (dropped, 1 < stride)
  REQUIRE(pairs.size() == 3);
  CHECK(flattened == std::vector<Token>(p.tokens.begin(), p.tokens.begin() + 12));
}

TEST_CASE("gen_ngram rejects invalid configs") {
  GenConfig cfg;
  cfg.ngram_stride = 0;
  CHECK_THROWS_AS(gen_ngram(ngram_passage(8), cfg), std::invalid_argument);
  cfg.ngram_stride = 8;
  cfg.ngram_n = 4;  // n < stride
  CHECK_THROWS_AS(gen_ngram(ngram_passage(8), cfg), std::invalid_argument);
}

TEST_CASE("salient_sentences ranks by max token idf") {
  // 4-doc corpus: "rareword" appears once, "common" everywhere.
  std::vector<Passage> ps;
  ps.push_back(Passage::make("target", std::nullopt,
                             "Common words only. The rareword appears here. Common again."));
  ps.push_back(Passage::make("d1", std::nullopt, "common the words only again appears"));
  ps.push_back(Passage::make("d2", std::nullopt, "common the words only again appears"));
  ps.push_back(Passage::make("d3", std::nullopt, "common the words only again appears"));
  const PassageCollection c = PassageCollection::from_passages(ps);

  const auto top = salient_sentences(c.passages()[0], c.stats(), 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].text == "The rareword appears here.");  // df("rareword") = 1
  // remaining two sentences tie on max idf; earlier position wins
  CHECK(top[1].text == "Common words only.");

  const auto all = salient_sentences(c.passages()[0], c.stats(), 10);
  CHECK(all.size() == 3);
  CHECK(salient_sentences(c.passages()[0], c.stats(), 0).empty());

  const Passage single = Passage::make("s", std::nullopt, "just one sentence");
  const auto only = salient_sentences(single, c.stats(), 5);
  REQUIRE(only.size() == 1);
  CHECK(only[0].text == "just one sentence");
}

TEST_CASE("standin_question emits top-idf terms in first-appearance order") {
  std::vector<Passage> ps;
  ps.push_back(Passage::make("t", std::nullopt, "foomatic filters"));
  ps.push_back(Passage::make("d1", std::nullopt, "aaa bbb"));
  ps.push_back(Passage::make("d2", std::nullopt, "aaa bbb"));
  const PassageCollection c = PassageCollection::from_passages(ps);
  const auto q = standin_question(c.passages()[0].tokens, c.stats());
  CHECK(q == std::vector<Token>{"what", "is", "known", "about", "foomatic", "filters"});
}

TEST_CASE("standin_question caps at five terms, ties broken by position") {
  // all terms share one df, so idf ties everywhere; the first five distinct
  // terms win and are emitted in appearance order
  std::vector<Passage> ps;
  ps.push_back(Passage::make("t", std::nullopt, "zebra apple zebra banana cherry date egg fig"));
  ps.push_back(Passage::make("d", std::nullopt, "unrelated words entirely"));
  const PassageCollection c = PassageCollection::from_passages(ps);
  const auto q = standin_question(c.passages()[0].tokens, c.stats());
  CHECK(q == std::vector<Token>{"what", "is", "known", "about", "zebra", "apple", "banana",
                                "cherry", "date"});
}

TEST_CASE("gen_questions emits passage-level plus salient-sentence questions") {
  std::vector<Passage> ps;
  ps.push_back(Passage::make(
      "t", std::nullopt,
      "Alpha beta gamma delta. Epsilon zeta eta theta. Iota kappa lambda mu."));
  ps.push_back(Passage::make("d1", std::nullopt, "filler words one"));
  ps.push_back(Passage::make("d2", std::nullopt, "filler words two"));
  const PassageCollection c = PassageCollection::from_passages(ps);
  GenConfig cfg;
  const auto pairs = gen_questions(c.passages()[0], c.stats(), cfg);
  REQUIRE(!pairs.empty());
  CHECK(pairs.size() <= 4);  // 1 passage-level + 3 sentences, minus duplicates
  for (const auto& pair : pairs) {
    CHECK(pair.passage_id == "t");
    CHECK(pair.source == PairSource::QGen);
    REQUIRE(pair.question.size() >= 5);
    CHECK(pair.question[0] == "what");
    CHECK(pair.question[3] == "about");
  }
}

TEST_CASE("gen_questions deduplicates identical question strings") {
  // single sentence: the passage-level and sentence-level questions coincide
  std::vector<Passage> ps;
  ps.push_back(Passage::make("t", std::nullopt, "alpha beta gamma"));
  ps.push_back(Passage::make("d", std::nullopt, "other stuff here"));
  const PassageCollection c = PassageCollection::from_passages(ps);
  GenConfig cfg;
  const auto pairs = gen_questions(c.passages()[0], c.stats(), cfg);
  CHECK(pairs.size() == 1);
}

TEST_CASE("gen_questions truncates the passage-level input to 512 tokens") {
  // a corpus-unique term parked beyond position 512 must not reach the
  // passage-level question
  std::vector<Token> tokens;
  for (int i = 0; i < 512; ++i) tokens.push_back("filler" + std::to_string(i % 7));
  tokens.push_back("needle");
  std::vector<Passage> ps;
  ps.push_back(Passage::make("t", std::nullopt, join(tokens)));
  ps.push_back(Passage::make("d", std::nullopt, "other words"));
  const PassageCollection c = PassageCollection::from_passages(ps);

  GenConfig cfg;
  cfg.salient_top_k = 0;  // passage-level question only
  const auto pairs = gen_questions(c.passages()[0], c.stats(), cfg);
  REQUIRE(pairs.size() == 1);
  CHECK(std::find(pairs[0].question.begin(), pairs[0].question.end(), "needle") ==
        pairs[0].question.end());
}

TEST_CASE("load_external_pairs passes rows through and validates ids") {
  TempDir tmp;
  const PassageCollection c = PassageCollection::from_passages(
      {Passage::make("p1", std::nullopt, "alpha"), Passage::make("p2", std::nullopt, "beta")});

  const fs::path good = tmp.path / "good.ndjson";
  std::ofstream(good) << R"({"question": "What is alpha?", "passage_id": "p1"})"
                      << "\n"
                      << R"({"question": "Beta who", "passage_id": "p2"})"
                      << "\n"
                      << R"({"question": "More alpha", "passage_id": "p1"})"
                      << "\n";
  const auto pairs = load_external_pairs(good, c);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].question == std::vector<Token>{"what", "is", "alpha"});
  CHECK(pairs[0].passage_id == "p1");
  for (const auto& pair : pairs) CHECK(pair.source == PairSource::External);

  const fs::path unknown = tmp.path / "unknown.ndjson";
  std::ofstream(unknown) << R"({"question": "ok", "passage_id": "p1"})"
                         << "\n"
                         << R"({"question": "bad", "passage_id": "missing"})"
                         << "\n";
  try {
    load_external_pairs(unknown, c);
    FAIL("expected unknown-id error");
  } catch (const std::exception& e) {
    const std::string what = e.what();
    CHECK(what.find("line 2") != std::string::npos);
    CHECK(what.find("missing") != std::string::npos);
  }

  const fs::path malformed = tmp.path / "malformed.ndjson";
  std::ofstream(malformed) << "{not json\n";
  CHECK_THROWS_AS(load_external_pairs(malformed, c), std::runtime_error);
}

TEST_CASE("subsample_corpus keeps whole documents") {
  std::vector<Passage> ps;
  for (int d = 0; d < 40; ++d)
    for (int k = 0; k < 3; ++k)
      ps.push_back(Passage::make("doc" + std::to_string(d) + "#" + std::to_string(k),
                                 std::nullopt, "some words d" + std::to_string(d)));
  const PassageCollection c = PassageCollection::from_passages(ps);

  for (std::uint64_t seed : {0ull, 1ull, 2ull}) {
    const PassageCollection sub = subsample_corpus(c, 0.5, seed);
    std::map<std::string, int> chunks_per_doc;
    for (const Passage& p : sub.passages())
      ++chunks_per_doc[p.id.substr(0, p.id.rfind('#'))];
    for (const auto& [doc, count] : chunks_per_doc) CHECK(count == 3);
  }
}

TEST_CASE("subsample_corpus fraction 1 is the identity") {
  std::vector<Passage> ps;
  for (int i = 0; i < 20; ++i)
    ps.push_back(Passage::make("p" + std::to_string(i), std::nullopt, "w" + std::to_string(i)));
  const PassageCollection c = PassageCollection::from_passages(ps);
  const PassageCollection sub = subsample_corpus(c, 1.0, 123);
  REQUIRE(sub.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(sub.passages()[i].id == c.passages()[i].id);
}

TEST_CASE("subsample_corpus is seed-deterministic and binomially sized") {
  std::vector<Passage> ps;
  ps.reserve(10000);
  for (int i = 0; i < 10000; ++i)
    ps.push_back(Passage::make("d" + std::to_string(i), std::nullopt, "body words"));
  const PassageCollection c = PassageCollection::from_passages(ps);

  const PassageCollection a = subsample_corpus(c, 0.2, 77);
  const PassageCollection b = subsample_corpus(c, 0.2, 77);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.passages()[i].id == b.passages()[i].id);

  // 3 sigma around np: 2000 +- 3 * sqrt(10000 * 0.2 * 0.8) = 2000 +- 120
  CHECK(a.size() >= 1880);
  CHECK(a.size() <= 2120);

  CHECK(subsample_corpus(c, 0.2, 78).size() != a.size());  // seed actually matters (w.h.p.)
}

TEST_CASE("subsample_corpus validates fraction") {
  const PassageCollection c = PassageCollection::from_passages(
      {Passage::make("p", std::nullopt, "words")});
  CHECK_THROWS_AS(subsample_corpus(c, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(subsample_corpus(c, 1.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(subsample_corpus(c, -0.1, 1), std::invalid_argument);
}

TEST_CASE("passage_rng derives a deterministic per-passage stream") {
  std::mt19937_64 a = passage_rng(5, "doc1#0");
  std::mt19937_64 b = passage_rng(5, "doc1#0");
  CHECK(a() == b());
  std::mt19937_64 other = passage_rng(5, "doc1#1");
  std::mt19937_64 other_seed = passage_rng(6, "doc1#0");
  CHECK(a() != other());  // w.h.p.
  (void)other_seed;
}

TEST_CASE("pairs file round-trip preserves every field") {
  TempDir tmp;
  std::vector<TrainingPair> pairs{
      {{"what", "is", "alpha"}, "p1", PairSource::QGen},
      {{"window", "tokens"}, "p2#3", PairSource::Ngram},
      {{"a", "sentence"}, "p2#3", PairSource::Ict},
      {{"imported"}, "p9", PairSource::External},
  };
  const fs::path path = tmp.path / "pairs.ndjson";
  write_pairs(path, pairs);
  const auto back = read_pairs(path);
  REQUIRE(back.size() == pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(back[i].question == pairs[i].question);
    CHECK(back[i].passage_id == pairs[i].passage_id);
    CHECK(back[i].source == pairs[i].source);
  }
}

TEST_CASE("read_pairs reports the offending line") {
  TempDir tmp;
  const fs::path path = tmp.path / "pairs.ndjson";
  std::ofstream(path) << R"({"question": "ok words", "passage_id": "p", "source": "ICT"})"
                      << "\n"
                      << R"({"question": "", "passage_id": "p", "source": "ICT"})"
                      << "\n";
  try {
    read_pairs(path);
    FAIL("expected error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}
