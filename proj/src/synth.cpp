#include "clir/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <unordered_set>

#include "clir/error.hpp"
#include "clir/rng.hpp"

namespace clir {

namespace {

constexpr const char* kConsonants = "bdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";

// the handful of untranslated filler words stopword_rate can splice in
const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words{"the", "of", "and", "to", "in"};
  return words;
}

std::string make_word(Rng& rng, int syllables) {
  std::string w;
  for (int i = 0; i < syllables; ++i) {
    w += kConsonants[uniform_below(rng, 14)];
    w += kVowels[uniform_below(rng, 5)];
  }
  return w;
}

std::vector<std::string> make_distinct_words(Rng& rng, std::int64_t count, int syllables,
                                             std::unordered_set<std::string>& used) {
  const StopwordSet& stop = builtin_stopwords();
  std::vector<std::string> words;
  words.reserve(static_cast<std::size_t>(count));
  while (words.size() < static_cast<std::size_t>(count)) {
    std::string w = make_word(rng, syllables);
    if (stop.count(w) || !used.insert(w).second) continue;
    words.push_back(std::move(w));
  }
  return words;
}

// Zipf-weighted sampler over word indices, without replacement per call
class ZipfSampler {
 public:
  explicit ZipfSampler(std::int64_t n) {
    cumulative_.reserve(static_cast<std::size_t>(n));
    double total = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      total += std::pow(static_cast<double>(i + 1), -0.7);
      cumulative_.push_back(total);
    }
  }

  std::vector<std::int64_t> draw(Rng& rng, std::int64_t count) {
    std::vector<std::int64_t> out;
    std::unordered_set<std::int64_t> seen;
    out.reserve(static_cast<std::size_t>(count));
    while (out.size() < static_cast<std::size_t>(count)) {
      const double u = uniform01(rng) * cumulative_.back();
      const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
      const std::int64_t idx = it - cumulative_.begin();
      if (seen.insert(idx).second) out.push_back(idx);
    }
    return out;
  }

  std::int64_t size() const { return static_cast<std::int64_t>(cumulative_.size()); }

 private:
  std::vector<double> cumulative_;
};

std::string padded_id(char prefix, std::int64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%03lld", prefix, static_cast<long long>(i));
  return buf;
}

}  // namespace

void SynthOptions::validate() const {
  if (vocab_size < 2) throw Error("synth: vocab_size must be at least 2");
  if (pairs < 1) throw Error("synth: pairs must be positive");
  if (documents < 0) throw Error("synth: documents must not be negative");
  if (documents > 0 && sentences_per_doc < 1)
    throw Error("synth: sentences_per_doc must be positive");
  if (queries < 0) throw Error("synth: queries must not be negative");
  if (queries > 0 && documents == 0)
    throw Error("synth: queries need documents to be relevant to");
  if (min_sentence_len < 1) throw Error("synth: min_sentence_len must be positive");
  if (max_sentence_len < min_sentence_len)
    throw Error("synth: max_sentence_len must be >= min_sentence_len");
  if (max_sentence_len > vocab_size)
    throw Error("synth: max_sentence_len cannot exceed vocab_size");
  if (!(stopword_rate >= 0.0 && stopword_rate < 1.0))
    throw Error("synth: stopword_rate must lie in [0, 1)");
}

TranslationTable SynthCorpus::oracle_table() const {
  TranslationTable table;
  for (std::size_t i = 0; i < english_words.size(); ++i)
    table.set(foreign_words[i], english_words[i], 1.0);
  return table;
}

std::string SynthCorpus::foreign_of(const std::string& english_word) const {
  for (std::size_t i = 0; i < english_words.size(); ++i)
    if (english_words[i] == english_word) return foreign_words[i];
  throw Error("synth: " + english_word + " is not a cipher vocabulary word");
}

SynthCorpus generate_synth_corpus(const SynthOptions& options) {
  options.validate();
  Rng rng(options.seed);
  SynthCorpus corpus;

  std::unordered_set<std::string> used;
  corpus.english_words = make_distinct_words(rng, options.vocab_size, 2, used);
  corpus.foreign_words = make_distinct_words(rng, options.vocab_size, 3, used);

  ZipfSampler sampler(options.vocab_size);
  const std::int64_t len_spread = options.max_sentence_len - options.min_sentence_len + 1;
  auto draw_sentence = [&]() {
    const std::int64_t len =
        options.min_sentence_len + static_cast<std::int64_t>(uniform_below(
                                       rng, static_cast<std::uint64_t>(len_spread)));
    return sampler.draw(rng, len);
  };
  auto cipher = [&](const std::vector<std::int64_t>& ids) {
    TokenSeq foreign;
    foreign.reserve(ids.size());
    for (std::int64_t id : ids) foreign.push_back(corpus.foreign_words[id]);
    fisher_yates_shuffle(foreign, rng);
    return foreign;
  };

  corpus.bitext.reserve(static_cast<std::size_t>(options.pairs));
  for (std::int64_t p = 0; p < options.pairs; ++p) {
    const std::vector<std::int64_t> ids = draw_sentence();
    TokenSeq english;
    english.reserve(ids.size());
    for (std::int64_t id : ids) english.push_back(corpus.english_words[id]);
    TokenSeq foreign = cipher(ids);
    if (options.stopword_rate > 0.0) {
      TokenSeq padded;
      padded.reserve(english.size() + 2);
      for (const std::string& w : english) {
        if (uniform01(rng) < options.stopword_rate)
          padded.push_back(filler_words()[uniform_below(rng, filler_words().size())]);
        padded.push_back(w);
      }
      english = std::move(padded);
    }
    corpus.bitext.push_back(BitextPair{p, std::move(foreign), std::move(english)});
  }

  corpus.documents.reserve(static_cast<std::size_t>(options.documents));
  corpus.hidden_english.reserve(static_cast<std::size_t>(options.documents));
  for (std::int64_t d = 0; d < options.documents; ++d) {
    Document doc;
    doc.doc_id = padded_id('d', d);
    TokenSeq hidden;
    for (std::int64_t s = 0; s < options.sentences_per_doc; ++s) {
      const std::vector<std::int64_t> ids = draw_sentence();
      for (std::int64_t id : ids) hidden.push_back(corpus.english_words[id]);
      doc.sentences.push_back(cipher(ids));
    }
    corpus.documents.push_back(std::move(doc));
    corpus.hidden_english.push_back(std::move(hidden));
  }

  if (options.queries > 0) {
    std::set<std::string> eligible_set;
    for (const TokenSeq& hidden : corpus.hidden_english)
      eligible_set.insert(hidden.begin(), hidden.end());
    std::vector<std::string> eligible(eligible_set.begin(), eligible_set.end());
    if (static_cast<std::int64_t>(eligible.size()) < options.queries)
      throw Error("synth: only " + std::to_string(eligible.size()) +
                  " document words available for " + std::to_string(options.queries) +
                  " queries");
    fisher_yates_shuffle(eligible, rng);
    eligible.resize(static_cast<std::size_t>(options.queries));

    for (std::int64_t q = 0; q < options.queries; ++q) {
      Query query;
      query.query_id = padded_id('q', q);
      query.terms = {eligible[static_cast<std::size_t>(q)]};
      corpus.queries.push_back(query);
      corpus.qrels.judged_queries.insert(query.query_id);
      for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
        const TokenSeq& hidden = corpus.hidden_english[d];
        if (std::find(hidden.begin(), hidden.end(), query.terms[0]) != hidden.end()) {
          const std::string& doc_id = corpus.documents[d].doc_id;
          corpus.qrels.relevant[query.query_id].insert(doc_id);
          corpus.qrels.judged_docs.insert(doc_id);
        }
      }
    }
  }

  return corpus;
}

void write_synth_corpus(const SynthCorpus& corpus, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  save_bitext(corpus.bitext, dir + "/bitext.tsv");
  save_documents(corpus.documents, dir + "/documents.jsonl");
  save_queries(corpus.queries, dir + "/queries.tsv");
  save_qrels(corpus.qrels, dir + "/qrels.tsv");
  save_table(corpus.oracle_table(), dir + "/oracle_table.tsv");
}

}  // namespace clir
