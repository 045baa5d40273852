#include "clir/probrank.hpp"

#include <cmath>
#include <limits>

#include "clir/error.hpp"

namespace clir {

BackgroundModel build_background(const std::vector<BitextPair>& pairs) {
  BackgroundModel bg;
  std::int64_t total = 0;
  for (const auto& pair : pairs) {
    for (const auto& token : pair.english) {
      ++bg.prob[token];
      ++total;
    }
  }
  bg.vocab_size = static_cast<std::int64_t>(bg.prob.size());
  const double denom = static_cast<double>(total + bg.vocab_size);
  if (denom > 0.0) {
    for (auto& [token, count] : bg.prob) count = (count + 1.0) / denom;
    bg.unseen_prob = 1.0 / denom;
  }
  return bg;
}

double occurrence_score(const Query& query, const Document& doc,
                        const TranslationTable& table) {
  double score = 1.0;
  for (const auto& q : query.terms) {
    double miss = 1.0;  // probability that q occurs in no token of the doc
    for (const auto& sentence : doc.sentences)
      for (const auto& f : sentence) miss *= 1.0 - table.lookup(f, q);
    score *= 1.0 - miss;
  }
  return score;
}

double generative_score(const Query& query, const Document& doc,
                        const TranslationTable& table,
                        const BackgroundModel& background, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must be in [0, 1]");

  std::unordered_map<std::string, double> doc_tf;
  std::int64_t doc_len = 0;
  for (const auto& sentence : doc.sentences)
    for (const auto& f : sentence) {
      ++doc_tf[f];
      ++doc_len;
    }
  if (doc_len == 0) throw Error("generative_score requires a non-empty document");

  double score = 0.0;
  for (const auto& q : query.terms) {
    double translation = 0.0;
    for (const auto& [f, count] : doc_tf)
      translation += table.lookup(f, q) * (count / static_cast<double>(doc_len));
    const double mix = alpha * background.p(q) + (1.0 - alpha) * translation;
    if (mix <= 0.0) return -std::numeric_limits<double>::infinity();
    score += std::log(mix);
  }
  return score;
}

}  // namespace clir
