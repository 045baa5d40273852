#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "clir/corpus.hpp"
#include "clir/error.hpp"
#include "testutil.hpp"

using namespace clir;
using testutil::TempDir;
using testutil::read_file;
using testutil::write_file;

TEST_CASE("load_bitext keeps file order and line-index pair ids") {
  TempDir dir("bitext");
  const std::string path = dir.file("b.tsv");
  write_file(path,
             "medikų teigimu dabar veikianti sistema efektyvi\t"
             "doctors allege that the system currently in operation is effective\n"
             "antra eilutė\tsecond line\n");
  const BitextCorpus corpus = load_bitext(path);
  REQUIRE(corpus.pairs.size() == 2);
  CHECK(corpus.skipped_lines == 0);
  CHECK(corpus.pairs[0].pair_id == 0);
  CHECK(corpus.pairs[1].pair_id == 1);
  CHECK(corpus.pairs[0].foreign ==
        TokenSeq{"medikų", "teigimu", "dabar", "veikianti", "sistema", "efektyvi"});
  CHECK(corpus.pairs[0].english[0] == "doctors");
  CHECK(corpus.pairs[1].english == TokenSeq{"second", "line"});
}

TEST_CASE("load_bitext on an empty file") {
  TempDir dir("bitext_empty");
  const std::string path = dir.file("b.tsv");
  write_file(path, "");
  const BitextCorpus corpus = load_bitext(path);
  CHECK(corpus.pairs.empty());
  CHECK(corpus.skipped_lines == 0);
}

TEST_CASE("load_bitext skips pairs with an empty side and counts them") {
  TempDir dir("bitext_skip");
  const std::string path = dir.file("b.tsv");
  write_file(path, "uno\tone\n...\tpunctuation only on the left\nduo\ttwo\n");
  const BitextCorpus corpus = load_bitext(path);
  REQUIRE(corpus.pairs.size() == 2);
  CHECK(corpus.skipped_lines == 1);
  // pair_id still reflects the source line, not the surviving index
  CHECK(corpus.pairs[1].pair_id == 2);
}

TEST_CASE("load_bitext rejects lines without exactly one tab") {
  TempDir dir("bitext_bad");
  const std::string path = dir.file("b.tsv");
  write_file(path, "a\tb\tc\n");
  CHECK_THROWS_WITH_AS(load_bitext(path), doctest::Contains("line 1"), ParseError);

  write_file(path, "good\tpair\nno tab here\n");
  CHECK_THROWS_WITH_AS(load_bitext(path), doctest::Contains("line 2"), ParseError);
}

TEST_CASE("load_bitext propagates io failure") {
  CHECK_THROWS_AS(load_bitext("/nonexistent/path/b.tsv"), IoError);
}

TEST_CASE("bitext round-trips through the wire format") {
  TempDir dir("bitext_rt");
  const std::string path = dir.file("b.tsv");
  write_file(path, "Medikų, teigimu!\tDoctors ALLEGE.\nkitas\tother\n");
  const BitextCorpus first = load_bitext(path);

  const std::string again = dir.file("b2.tsv");
  save_bitext(first.pairs, again);
  const BitextCorpus second = load_bitext(again);
  REQUIRE(first.pairs.size() == second.pairs.size());
  for (std::size_t i = 0; i < first.pairs.size(); ++i) {
    CHECK(first.pairs[i].foreign == second.pairs[i].foreign);
    CHECK(first.pairs[i].english == second.pairs[i].english);
  }
}

TEST_CASE("vocabulary ids follow descending frequency then lexicographic order") {
  const std::vector<TokenSeq> texts{{"a", "b"}, {"a"}};
  const Vocabulary vocab = Vocabulary::build(texts, {});
  REQUIRE(vocab.size() == 2);
  CHECK(vocab.id_of("a") == 0);
  CHECK(vocab.id_of("b") == 1);
  CHECK(vocab.entry(0).frequency == 2);
  CHECK(vocab.entry(1).frequency == 1);
  CHECK_FALSE(vocab.id_of("missing").has_value());

  // tie on frequency resolves lexicographically
  const Vocabulary tied = Vocabulary::build({{"zeta", "beta"}, {"kappa"}, {"kappa"}}, {});
  CHECK(tied.id_of("kappa") == 0);
  CHECK(tied.id_of("beta") == 1);
  CHECK(tied.id_of("zeta") == 2);
}

TEST_CASE("vocabulary honours min_freq and reports an empty result") {
  const std::vector<TokenSeq> texts{{"a", "b"}, {"a"}};
  CHECK_THROWS_AS(Vocabulary::build(texts, {}, 3), Error);
  const Vocabulary vocab = Vocabulary::build(texts, {}, 2);
  CHECK(vocab.size() == 1);
  CHECK(vocab.contains("a"));
}

TEST_CASE("vocabulary flags stopwords and excludes them from query candidates") {
  const std::vector<TokenSeq> texts{
      {"doctors", "allege", "that", "the", "system"}, {"the", "system"}};
  const Vocabulary vocab = Vocabulary::build(texts, builtin_stopwords());
  CHECK(vocab.is_stopword("the"));
  CHECK(vocab.is_stopword("that"));
  CHECK_FALSE(vocab.is_stopword("doctors"));
  for (std::int64_t id : vocab.non_stopword_ids())
    CHECK_FALSE(vocab.entry(id).is_stopword);
  // stopwords stay in the vocabulary, they are only flagged
  CHECK(vocab.contains("the"));
}

TEST_CASE("vocabulary determinism and wire round-trip") {
  const std::vector<TokenSeq> texts{{"c", "b", "a"}, {"b", "a"}, {"a"}};
  const Vocabulary v1 = Vocabulary::build(texts, builtin_stopwords());
  const Vocabulary v2 = Vocabulary::build(texts, builtin_stopwords());
  REQUIRE(v1.size() == v2.size());
  for (std::int64_t i = 0; i < v1.size(); ++i) {
    CHECK(v1.entry(i).token == v2.entry(i).token);
    CHECK(v1.entry(i).frequency == v2.entry(i).frequency);
  }

  TempDir dir("vocab");
  const std::string path = dir.file("v.tsv");
  save_vocabulary(v1, path);
  const Vocabulary loaded = load_vocabulary(path);
  REQUIRE(loaded.size() == v1.size());
  for (std::int64_t i = 0; i < v1.size(); ++i) {
    CHECK(loaded.entry(i).token == v1.entry(i).token);
    CHECK(loaded.entry(i).frequency == v1.entry(i).frequency);
    CHECK(loaded.entry(i).is_stopword == v1.entry(i).is_stopword);
  }
}

TEST_CASE("stopword file loader reads one token per line") {
  TempDir dir("stop");
  const std::string path = dir.file("stop.txt");
  write_file(path, "the\nof\n\nand\n");
  const StopwordSet stops = load_stopwords(path);
  CHECK(stops.count("the") == 1);
  CHECK(stops.count("and") == 1);
  CHECK(stops.count("doctors") == 0);
}

namespace {

void write_retrieval_fixture(const TempDir& dir) {
  write_file(dir.file("docs.jsonl"),
             R"({"id": "d1", "sentences": ["vienas du", "trys"]})"
             "\n"
             R"({"id": "d2", "sentences": ["keturi penki"]})"
             "\n");
  write_file(dir.file("queries.tsv"), "q1\tsystem\nq2\tdoctors allege\n");
  write_file(dir.file("qrels.tsv"), "q1\td1\t1\nq1\td2\t0\nq2\td2\t1\n");
}

}  // namespace

TEST_CASE("load_retrieval_inputs loads consistent collections intact") {
  TempDir dir("retr");
  write_retrieval_fixture(dir);
  const RetrievalInputs in = load_retrieval_inputs(
      dir.file("docs.jsonl"), dir.file("queries.tsv"), dir.file("qrels.tsv"));
  REQUIRE(in.documents.size() == 2);
  REQUIRE(in.queries.size() == 2);
  CHECK(in.documents[0].doc_id == "d1");
  CHECK(in.documents[0].sentences.size() == 2);
  CHECK(in.documents[0].sentences[0] == TokenSeq{"vienas", "du"});
  CHECK(in.queries[1].terms == TokenSeq{"doctors", "allege"});
  CHECK(in.qrels.is_relevant("q1", "d1"));
  CHECK_FALSE(in.qrels.is_relevant("q1", "d2"));
  // a query judged only with 0s still counts as judged
  CHECK(in.qrels.judged_queries.count("q1") == 1);
  CHECK(in.qrels.judged_docs.count("d2") == 1);
}

TEST_CASE("load_retrieval_inputs rejects dangling qrels ids by name") {
  TempDir dir("retr_dangle");
  write_retrieval_fixture(dir);
  write_file(dir.file("qrels.tsv"), "q1\td9\t1\n");
  CHECK_THROWS_WITH_AS(
      load_retrieval_inputs(dir.file("docs.jsonl"), dir.file("queries.tsv"),
                            dir.file("qrels.tsv")),
      doctest::Contains("d9"), IntegrityError);

  write_file(dir.file("qrels.tsv"), "q9\td1\t1\n");
  CHECK_THROWS_WITH_AS(
      load_retrieval_inputs(dir.file("docs.jsonl"), dir.file("queries.tsv"),
                            dir.file("qrels.tsv")),
      doctest::Contains("q9"), IntegrityError);
}

TEST_CASE("queries reduced to nothing by stopword stripping are rejected") {
  TempDir dir("retr_stop");
  write_retrieval_fixture(dir);
  write_file(dir.file("queries.tsv"), "q1\tthe of and\n");
  CHECK_THROWS_WITH_AS(
      load_queries(dir.file("queries.tsv"), builtin_stopwords()),
      doctest::Contains("q1"), Error);
}

TEST_CASE("documents and qrels wire formats round-trip") {
  TempDir dir("retr_rt");
  write_retrieval_fixture(dir);
  const RetrievalInputs in = load_retrieval_inputs(
      dir.file("docs.jsonl"), dir.file("queries.tsv"), dir.file("qrels.tsv"));

  save_documents(in.documents, dir.file("docs2.jsonl"));
  save_queries(in.queries, dir.file("queries2.tsv"));
  save_qrels(in.qrels, dir.file("qrels2.tsv"));
  const RetrievalInputs back = load_retrieval_inputs(
      dir.file("docs2.jsonl"), dir.file("queries2.tsv"), dir.file("qrels2.tsv"));

  REQUIRE(back.documents.size() == in.documents.size());
  for (std::size_t i = 0; i < in.documents.size(); ++i) {
    CHECK(back.documents[i].doc_id == in.documents[i].doc_id);
    CHECK(back.documents[i].sentences == in.documents[i].sentences);
  }
  CHECK(back.qrels.relevant == in.qrels.relevant);
}
