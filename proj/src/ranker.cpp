#include "clir/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "clir/error.hpp"

namespace clir {

namespace {

std::string format_score(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void sort_entries(std::vector<RunEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const RunEntry& a, const RunEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
}

}  // namespace

double noisy_or_doc_score(const SentenceScorer& scorer, const Query& query,
                          const Document& doc) {
  double none_match = 1.0;
  for (const TokenSeq& sentence : doc.sentences) {
    double all_terms = 1.0;
    for (const std::string& term : query.terms) {
      double p = scorer(term, sentence);
      if (!(p >= 0.0 && p <= 1.0))
        throw ContractError("sentence scorer returned " + format_score(p) +
                            " outside [0, 1]");
      all_terms *= p;
    }
    none_match *= 1.0 - all_terms;
  }
  return 1.0 - none_match;
}

Run produce_run(const DocScorer& scorer, const std::vector<Query>& queries,
                const std::vector<Document>& documents) {
  Run run;
  run.reserve(queries.size());
  for (const Query& query : queries) {
    RankedList list;
    list.query_id = query.query_id;
    list.entries.reserve(documents.size());
    for (const Document& doc : documents) {
      double score = 0.0;
      try {
        score = scorer(query, doc);
      } catch (const Error& e) {
        throw Error("scoring query " + query.query_id + " against doc " + doc.doc_id +
                    ": " + e.what());
      }
      list.entries.push_back(RunEntry{doc.doc_id, score});
    }
    sort_entries(list.entries);
    run.push_back(std::move(list));
  }
  return run;
}

void save_run(const std::string& path, const Run& run) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const RankedList& list : run) {
    std::int64_t rank = 0;
    for (const RunEntry& e : list.entries) {
      out << list.query_id << '\t' << e.doc_id << '\t' << ++rank << '\t'
          << format_score(e.score) << '\n';
    }
  }
  if (!out) throw IoError("failed while writing " + path);
}

Run load_run(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  Run run;
  std::map<std::string, std::size_t> index;  // query_id -> position in run
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string query_id, doc_id, rank_str, score_str;
    if (!std::getline(ls, query_id, '\t') || !std::getline(ls, doc_id, '\t') ||
        !std::getline(ls, rank_str, '\t') || !std::getline(ls, score_str))
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": expected query_id<TAB>doc_id<TAB>rank<TAB>score");
    std::size_t used = 0;
    long long rank = 0;
    double score = 0.0;
    try {
      rank = std::stoll(rank_str, &used);
      if (used != rank_str.size()) throw std::invalid_argument("rank");
      used = 0;
      score = std::stod(score_str, &used);
      if (used != score_str.size()) throw std::invalid_argument("score");
    } catch (const std::exception&) {
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": malformed rank or score");
    }
    if (rank < 1)
      throw ParseError(path + ": line " + std::to_string(lineno) + ": rank must be >= 1");
    if (!seen.insert({query_id, doc_id}).second)
      throw ParseError(path + ": line " + std::to_string(lineno) + ": duplicate doc " +
                       doc_id + " for query " + query_id);

    auto [it, fresh] = index.try_emplace(query_id, run.size());
    if (fresh) run.push_back(RankedList{query_id, {}});
    run[it->second].entries.push_back(RunEntry{doc_id, score});
  }
  for (RankedList& list : run) sort_entries(list.entries);
  return run;
}

SentenceScorer neural_sentence_scorer(Model& model, const TokenCodec& codec) {
  Model* m = &model;
  const TokenCodec* c = &codec;
  return [m, c](const std::string& term, const TokenSeq& sentence) {
    std::vector<std::int64_t> ids = c->encode_sentence(sentence);
    return m->score(c->encode_query(term), ids);
  };
}

DocScorer noisy_or_scorer(SentenceScorer scorer) {
  return [scorer = std::move(scorer)](const Query& query, const Document& doc) {
    return noisy_or_doc_score(scorer, query, doc);
  };
}

DocScorer occurrence_doc_scorer(const TranslationTable& table) {
  const TranslationTable* t = &table;
  return [t](const Query& query, const Document& doc) {
    return occurrence_score(query, doc, *t);
  };
}

DocScorer generative_doc_scorer(const TranslationTable& table, const BackgroundModel& bg,
                                double alpha) {
  const TranslationTable* t = &table;
  const BackgroundModel* b = &bg;
  return [t, b, alpha](const Query& query, const Document& doc) {
    return generative_score(query, doc, *t, *b, alpha);
  };
}

}  // namespace clir
