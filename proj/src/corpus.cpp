#include "clir/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "clir/error.hpp"

namespace clir {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

// getline that tolerates a trailing CR (files may arrive with CRLF endings).
bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

const StopwordSet& builtin_stopwords() {
  static const StopwordSet words = {
      "a",       "about",   "above",  "after",   "again",  "against", "all",
      "am",      "an",      "and",    "any",     "are",    "as",      "at",
      "be",      "because", "been",   "before",  "being",  "below",   "between",
      "both",    "but",     "by",     "can",     "cannot", "could",   "did",
      "do",      "does",    "doing",  "down",    "during", "each",    "few",
      "for",     "from",    "further","had",     "has",    "have",    "having",
      "he",      "her",     "here",   "hers",    "herself","him",     "himself",
      "his",     "how",     "i",      "if",      "in",     "into",    "is",
      "it",      "its",     "itself", "just",    "me",     "more",    "most",
      "my",      "myself",  "no",     "nor",     "not",    "now",     "of",
      "off",     "on",      "once",   "only",    "or",     "other",   "ought",
      "our",     "ours",    "ourselves", "out",  "over",   "own",     "same",
      "shall",   "she",     "should", "so",      "some",   "such",    "than",
      "that",    "the",     "their",  "theirs",  "them",   "themselves",
      "then",    "there",   "these",  "they",    "this",   "those",   "through",
      "to",      "too",     "under",  "until",   "up",     "upon",    "us",
      "very",    "was",     "we",     "were",    "what",   "when",    "where",
      "which",   "while",   "who",    "whom",    "why",    "will",    "with",
      "within",  "without", "would",  "you",     "your",   "yours",   "yourself",
      "yourselves",
  };
  return words;
}

StopwordSet load_stopwords(const std::string& path) {
  auto in = open_input(path);
  StopwordSet out;
  std::string line;
  while (read_line(in, line)) {
    if (!line.empty()) out.insert(line);
  }
  return out;
}

Vocabulary Vocabulary::build(const std::vector<TokenSeq>& texts,
                             const StopwordSet& stopwords, std::int64_t min_freq) {
  if (min_freq < 1) throw Error("min_freq must be >= 1");
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& text : texts)
    for (const auto& token : text) ++counts[token];

  std::vector<VocabEntry> entries;
  entries.reserve(counts.size());
  for (const auto& [token, freq] : counts) {
    if (freq >= min_freq)
      entries.push_back({token, freq, stopwords.count(token) > 0});
  }
  if (entries.empty())
    throw Error("empty vocabulary: no token reaches min_freq=" +
                std::to_string(min_freq));
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.token < b.token;
  });
  return from_entries(std::move(entries));
}

Vocabulary Vocabulary::from_entries(std::vector<VocabEntry> entries) {
  Vocabulary v;
  v.entries_ = std::move(entries);
  for (std::size_t i = 0; i < v.entries_.size(); ++i) {
    const auto [it, inserted] =
        v.index_.emplace(v.entries_[i].token, static_cast<std::int64_t>(i));
    if (!inserted) throw Error("duplicate vocabulary token: " + v.entries_[i].token);
  }
  return v;
}

std::optional<std::int64_t> Vocabulary::id_of(const std::string& token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Vocabulary::is_stopword(const std::string& token) const {
  const auto it = index_.find(token);
  return it != index_.end() && entries_[it->second].is_stopword;
}

std::vector<std::int64_t> Vocabulary::non_stopword_ids() const {
  std::vector<std::int64_t> ids;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (!entries_[i].is_stopword) ids.push_back(static_cast<std::int64_t>(i));
  return ids;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  auto out = open_output(path);
  for (const auto& e : vocab.entries())
    out << e.token << '\t' << e.frequency << '\t' << (e.is_stopword ? 1 : 0) << '\n';
}

Vocabulary load_vocabulary(const std::string& path) {
  auto in = open_input(path);
  std::vector<VocabEntry> entries;
  std::string line;
  std::int64_t lineno = 0;
  while (read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": expected token<TAB>frequency<TAB>flag");
    VocabEntry e;
    e.token = fields[0];
    try {
      e.frequency = std::stoll(fields[1]);
      e.is_stopword = std::stoi(fields[2]) != 0;
    } catch (const std::exception&) {
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": bad numeric field");
    }
    entries.push_back(std::move(e));
  }
  return Vocabulary::from_entries(std::move(entries));
}

BitextCorpus load_bitext(const std::string& path, const TokenizerRules& rules) {
  auto in = open_input(path);
  BitextCorpus corpus;
  std::string line;
  std::int64_t lineno = 0;
  while (read_line(in, line)) {
    const std::int64_t line_index = lineno++;
    const auto fields = split_tabs(line);
    if (fields.size() != 2)
      throw ParseError(path + ": line " + std::to_string(line_index + 1) +
                       ": expected exactly one TAB");
    BitextPair pair;
    pair.pair_id = line_index;
    pair.foreign = tokenize(fields[0], rules);
    pair.english = tokenize(fields[1], rules);
    if (pair.foreign.empty() || pair.english.empty()) {
      ++corpus.skipped_lines;
      continue;
    }
    corpus.pairs.push_back(std::move(pair));
  }
  return corpus;
}

void save_bitext(const std::vector<BitextPair>& pairs, const std::string& path) {
  auto out = open_output(path);
  for (const auto& p : pairs)
    out << join_tokens(p.foreign) << '\t' << join_tokens(p.english) << '\n';
}

std::vector<TokenSeq> english_sides(const std::vector<BitextPair>& pairs) {
  std::vector<TokenSeq> sides;
  sides.reserve(pairs.size());
  for (const auto& p : pairs) sides.push_back(p.english);
  return sides;
}

std::vector<TokenSeq> foreign_sides(const std::vector<BitextPair>& pairs) {
  std::vector<TokenSeq> sides;
  sides.reserve(pairs.size());
  for (const auto& p : pairs) sides.push_back(p.foreign);
  return sides;
}

bool Qrels::is_relevant(const std::string& query_id, const std::string& doc_id) const {
  const auto it = relevant.find(query_id);
  return it != relevant.end() && it->second.count(doc_id) > 0;
}

const std::set<std::string>& Qrels::for_query(const std::string& query_id) const {
  static const std::set<std::string> empty;
  const auto it = relevant.find(query_id);
  return it == relevant.end() ? empty : it->second;
}

std::vector<Document> load_documents(const std::string& path,
                                     const TokenizerRules& rules) {
  auto in = open_input(path);
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::int64_t lineno = 0;
  while (read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("sentences"))
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": expected {\"id\", \"sentences\"}");
    Document doc;
    doc.doc_id = j.at("id").get<std::string>();
    for (const auto& raw : j.at("sentences")) {
      TokenSeq tokens = tokenize(raw.get<std::string>(), rules);
      if (!tokens.empty()) doc.sentences.push_back(std::move(tokens));
    }
    if (doc.sentences.empty())
      throw Error(path + ": document " + doc.doc_id +
                  " has no non-empty sentence after normalization");
    if (!seen.insert(doc.doc_id).second)
      throw IntegrityError(path + ": duplicate doc_id " + doc.doc_id);
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Query> load_queries(const std::string& path,
                                const StopwordSet& stopwords,
                                const TokenizerRules& rules) {
  auto in = open_input(path);
  std::vector<Query> queries;
  std::unordered_set<std::string> seen;
  std::string line;
  std::int64_t lineno = 0;
  while (read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": expected query_id<TAB>text");
    Query q;
    q.query_id = fields[0];
    for (auto& token : tokenize(fields[1], rules)) {
      if (stopwords.count(token) == 0) q.terms.push_back(std::move(token));
    }
    if (q.terms.empty())
      throw Error(path + ": query " + q.query_id +
                  " has no terms after normalization and stopword removal");
    if (!seen.insert(q.query_id).second)
      throw IntegrityError(path + ": duplicate query_id " + q.query_id);
    queries.push_back(std::move(q));
  }
  return queries;
}

Qrels load_qrels(const std::string& path) {
  auto in = open_input(path);
  Qrels qrels;
  std::string line;
  std::int64_t lineno = 0;
  while (read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": expected query_id<TAB>doc_id<TAB>relevance");
    if (fields[2] != "0" && fields[2] != "1")
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": relevance must be 0 or 1");
    qrels.judged_queries.insert(fields[0]);
    qrels.judged_docs.insert(fields[1]);
    if (fields[2] == "1") qrels.relevant[fields[0]].insert(fields[1]);
  }
  return qrels;
}

void save_documents(const std::vector<Document>& documents, const std::string& path) {
  auto out = open_output(path);
  for (const Document& doc : documents) {
    nlohmann::ordered_json j;
    j["id"] = doc.doc_id;
    std::vector<std::string> sentences;
    sentences.reserve(doc.sentences.size());
    for (const TokenSeq& s : doc.sentences) sentences.push_back(join_tokens(s));
    j["sentences"] = sentences;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed while writing " + path);
}

void save_queries(const std::vector<Query>& queries, const std::string& path) {
  auto out = open_output(path);
  for (const Query& q : queries) out << q.query_id << '\t' << join_tokens(q.terms) << '\n';
  if (!out) throw IoError("failed while writing " + path);
}

void save_qrels(const Qrels& qrels, const std::string& path) {
  auto out = open_output(path);
  for (const auto& [query_id, docs] : qrels.relevant)
    for (const std::string& doc_id : docs)
      out << query_id << '\t' << doc_id << '\t' << 1 << '\n';
  if (!out) throw IoError("failed while writing " + path);
}

RetrievalInputs load_retrieval_inputs(const std::string& doc_path,
                                      const std::string& query_path,
                                      const std::string& qrels_path,
                                      const StopwordSet& query_stopwords,
                                      const TokenizerRules& rules) {
  RetrievalInputs inputs;
  inputs.documents = load_documents(doc_path, rules);
  inputs.queries = load_queries(query_path, query_stopwords, rules);
  inputs.qrels = load_qrels(qrels_path);

  std::unordered_set<std::string> doc_ids, query_ids;
  for (const auto& d : inputs.documents) doc_ids.insert(d.doc_id);
  for (const auto& q : inputs.queries) query_ids.insert(q.query_id);
  for (const auto& query_id : inputs.qrels.judged_queries)
    if (query_ids.count(query_id) == 0)
      throw IntegrityError("qrels references unknown query_id " + query_id);
  for (const auto& doc_id : inputs.qrels.judged_docs)
    if (doc_ids.count(doc_id) == 0)
      throw IntegrityError("qrels references unknown doc_id " + doc_id);
  return inputs;
}

}  // namespace clir
