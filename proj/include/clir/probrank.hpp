#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "clir/corpus.hpp"
#include "clir/lexicon.hpp"

namespace clir {

// English unigram model with add-one smoothing, estimated from the bitext
// English sides. Out-of-vocabulary queries receive the unseen-event mass so
// mixture scores stay finite.
struct BackgroundModel {
  std::unordered_map<std::string, double> prob;
  double unseen_prob = 0.0;
  std::int64_t vocab_size = 0;

  double p(const std::string& q) const {
    const auto it = prob.find(q);
    return it == prob.end() ? unseen_prob : it->second;
  }
};

BackgroundModel build_background(const std::vector<BitextPair>& pairs);

// Probability that every query term occurs at least once in the document:
//   P = prod_q [ 1 - prod_f (1 - p(q|f)) ]
// where f ranges over every token occurrence in all sentences of the
// document.
double occurrence_score(const Query& query, const Document& doc,
                        const TranslationTable& table);

// Generative translation model with background mixture smoothing:
//   score = sum_q log[ alpha * p(q|GE) + (1 - alpha) * sum_f p(q|f) p(f|Doc) ]
// with p(f|Doc) = count(f, Doc) / |Doc|. With alpha = 0 and no translation
// evidence for some term the score is -infinity, which ranks last.
double generative_score(const Query& query, const Document& doc,
                        const TranslationTable& table,
                        const BackgroundModel& background, double alpha);

}  // namespace clir
