#include "hyret/pairs.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace hyret {

std::string to_string(PairSource source) {
  switch (source) {
    case PairSource::Ict: return "ICT";
    case PairSource::Ngram: return "NGRAM";
    case PairSource::QGen: return "QGEN";
    case PairSource::External: return "EXTERNAL";
  }
  throw std::logic_error("unknown pair source");
}

PairSource pair_source_from_string(const std::string& name) {
  if (name == "ICT") return PairSource::Ict;
  if (name == "NGRAM") return PairSource::Ngram;
  if (name == "QGEN") return PairSource::QGen;
  if (name == "EXTERNAL") return PairSource::External;
  throw std::runtime_error("unknown pair source \"" + name + "\"");
}

namespace {
std::string join_tokens(const std::vector<Token>& tokens) {
  std::string s;
  for (const Token& t : tokens) {
    if (!s.empty()) s.push_back(' ');
    s += t;
  }
  return s;
}
}  // namespace

void write_pairs(const std::filesystem::path& path, const std::vector<TrainingPair>& pairs) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  for (const TrainingPair& p : pairs) {
    nlohmann::json rec{{"question", join_tokens(p.question)},
                       {"passage_id", p.passage_id},
                       {"source", to_string(p.source)}};
    f << rec.dump() << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<TrainingPair> read_pairs(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open pairs file: " + path.string());
  std::vector<TrainingPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      nlohmann::json rec = nlohmann::json::parse(line);
      TrainingPair p;
      p.question = tokenize(rec.at("question").get<std::string>());
      p.passage_id = rec.at("passage_id").get<std::string>();
      p.source = pair_source_from_string(rec.at("source").get<std::string>());
      if (p.question.empty())
        throw std::runtime_error("question has no tokens");
      pairs.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + " line " + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  return pairs;
}

}  // namespace hyret
