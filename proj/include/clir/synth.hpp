#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clir/corpus.hpp"
#include "clir/lexicon.hpp"

namespace clir {

// Cipher-language corpus generator. English sentences are drawn from a
// Zipf-weighted synthetic vocabulary; each foreign sentence is the word-for-
// word ciphered translation, shuffled so models must learn the mapping
// rather than positions. The cipher is the ground truth for oracle tests.
struct SynthOptions {
  std::int64_t vocab_size = 200;
  std::int64_t pairs = 2000;
  std::int64_t documents = 100;
  std::int64_t sentences_per_doc = 5;
  std::int64_t queries = 50;
  std::int64_t min_sentence_len = 5;
  std::int64_t max_sentence_len = 12;
  // chance of splicing an untranslated English function word into the
  // English side of a bitext pair
  double stopword_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthCorpus {
  std::vector<std::string> english_words;  // english_words[i] ciphers to
  std::vector<std::string> foreign_words;  // foreign_words[i]
  std::vector<BitextPair> bitext;
  std::vector<Document> documents;           // foreign-language sentences
  std::vector<TokenSeq> hidden_english;      // per document, its translation
  std::vector<Query> queries;                // single-word English queries
  Qrels qrels;  // doc relevant iff its hidden translation contains the word

  // exact inverse of the cipher: p(english | foreign) = 1
  TranslationTable oracle_table() const;
  std::string foreign_of(const std::string& english_word) const;
};

SynthCorpus generate_synth_corpus(const SynthOptions& options);

// Writes bitext.tsv, documents.jsonl, queries.tsv, qrels.tsv and
// oracle_table.tsv into `dir` (created if missing).
void write_synth_corpus(const SynthCorpus& corpus, const std::string& dir);

}  // namespace clir
