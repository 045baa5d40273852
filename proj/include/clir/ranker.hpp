#pragma once

#include <functional>
#include <string>
#include <vector>

#include "clir/corpus.hpp"
#include "clir/lexicon.hpp"
#include "clir/nn.hpp"
#include "clir/probrank.hpp"

namespace clir {

struct RunEntry {
  std::string doc_id;
  double score = 0.0;
};

// Per-query rankings, descending score with ties broken by ascending doc_id.
struct RankedList {
  std::string query_id;
  std::vector<RunEntry> entries;
};

using Run = std::vector<RankedList>;

// p(query term | sentence), must land in [0, 1]
using SentenceScorer =
    std::function<double(const std::string& term, const TokenSeq& sentence)>;
using DocScorer = std::function<double(const Query& query, const Document& doc)>;

// P(doc relevant) = 1 - prod_s (1 - prod_t p(t|s)): any sentence matching
// every query term pulls the document toward 1
double noisy_or_doc_score(const SentenceScorer& scorer, const Query& query,
                          const Document& doc);

// scores every (query, document) pair and sorts per query; scorer errors are
// rethrown annotated with the offending (query_id, doc_id)
Run produce_run(const DocScorer& scorer, const std::vector<Query>& queries,
                const std::vector<Document>& documents);

// Wire format: `query_id<TAB>doc_id<TAB>rank<TAB>score`, rank from 1, score
// with 17 significant digits. load_run re-sorts, so hand-edited files with
// stale ranks still produce a valid Run.
void save_run(const std::string& path, const Run& run);
Run load_run(const std::string& path);

// scorer factories; captured objects must outlive the returned closure
SentenceScorer neural_sentence_scorer(Model& model, const TokenCodec& codec);
DocScorer noisy_or_scorer(SentenceScorer scorer);
DocScorer occurrence_doc_scorer(const TranslationTable& table);
DocScorer generative_doc_scorer(const TranslationTable& table, const BackgroundModel& bg,
                                double alpha);

}  // namespace clir
