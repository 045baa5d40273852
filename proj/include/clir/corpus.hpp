#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "clir/text.hpp"

namespace clir {

using StopwordSet = std::unordered_set<std::string>;

// Built-in English function-word list (~150 words); overridable by file.
const StopwordSet& builtin_stopwords();
StopwordSet load_stopwords(const std::string& path);

struct VocabEntry {
  std::string token;
  std::int64_t frequency = 0;
  bool is_stopword = false;
};

// Bijective token<->id map. Ids are dense 0..N-1, assigned by descending
// frequency with lexicographic tie-break, so identical corpora always yield
// identical id assignments.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Entries for all tokens of `texts` with frequency >= min_freq. Throws
  // Error when nothing qualifies.
  static Vocabulary build(const std::vector<TokenSeq>& texts,
                          const StopwordSet& stopwords, std::int64_t min_freq = 1);
  static Vocabulary from_entries(std::vector<VocabEntry> entries);

  std::int64_t size() const { return static_cast<std::int64_t>(entries_.size()); }
  std::optional<std::int64_t> id_of(const std::string& token) const;
  const VocabEntry& entry(std::int64_t id) const { return entries_.at(id); }
  const std::vector<VocabEntry>& entries() const { return entries_; }
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  bool is_stopword(const std::string& token) const;
  std::vector<std::int64_t> non_stopword_ids() const;

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, std::int64_t> index_;
};

// Wire format: one entry per line in id order, `token<TAB>frequency<TAB>0|1`.
void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

struct BitextPair {
  std::int64_t pair_id = 0;  // 0-based line index in the source file
  TokenSeq foreign;
  TokenSeq english;
};

struct BitextCorpus {
  std::vector<BitextPair> pairs;
  std::int64_t skipped_lines = 0;  // lines where either side tokenized to empty
};

// One pair per line, `foreign<TAB>english`. A line with any other number of
// TABs raises ParseError naming the 1-based line number.
BitextCorpus load_bitext(const std::string& path, const TokenizerRules& rules = {});
void save_bitext(const std::vector<BitextPair>& pairs, const std::string& path);

std::vector<TokenSeq> english_sides(const std::vector<BitextPair>& pairs);
std::vector<TokenSeq> foreign_sides(const std::vector<BitextPair>& pairs);

struct Document {
  std::string doc_id;
  std::vector<TokenSeq> sentences;  // non-empty, each sentence non-empty
};

struct Query {
  std::string query_id;
  TokenSeq terms;  // normalized, at least one term
};

// Binary relevance judgments per query; absent pairs mean non-relevant.
// judged_queries/judged_docs keep every id seen in the judgment file, so a
// query judged only with 0s still counts toward the evaluation universe.
struct Qrels {
  std::map<std::string, std::set<std::string>> relevant;
  std::set<std::string> judged_queries;
  std::set<std::string> judged_docs;

  bool is_relevant(const std::string& query_id, const std::string& doc_id) const;
  const std::set<std::string>& for_query(const std::string& query_id) const;
};

std::vector<Document> load_documents(const std::string& path,
                                     const TokenizerRules& rules = {});
// Query terms are normalized like bitext English sides; tokens found in
// `stopwords` are dropped. A query left with no terms raises Error naming its
// query_id.
std::vector<Query> load_queries(const std::string& path,
                                const StopwordSet& stopwords = {},
                                const TokenizerRules& rules = {});
Qrels load_qrels(const std::string& path);

void save_documents(const std::vector<Document>& documents, const std::string& path);
void save_queries(const std::vector<Query>& queries, const std::string& path);
// Emits only the relevant pairs, one `query_id<TAB>doc_id<TAB>1` line each;
// absent pairs are non-relevant by convention.
void save_qrels(const Qrels& qrels, const std::string& path);

struct RetrievalInputs {
  std::vector<Document> documents;
  std::vector<Query> queries;
  Qrels qrels;
};

// Loads all three collections and verifies that every id referenced by the
// qrels exists (IntegrityError naming the dangling id otherwise).
RetrievalInputs load_retrieval_inputs(const std::string& doc_path,
                                      const std::string& query_path,
                                      const std::string& qrels_path,
                                      const StopwordSet& query_stopwords = {},
                                      const TokenizerRules& rules = {});

}  // namespace clir
