#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "clir/error.hpp"
#include "clir/probrank.hpp"
#include "clir/ranker.hpp"
#include "clir/rng.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace clir;
using testutil::TempDir;

namespace {

SentenceScorer fixed_scorer(std::map<std::string, double> by_term) {
  return [by_term](const std::string& term, const TokenSeq&) {
    const auto it = by_term.find(term);
    return it == by_term.end() ? 0.0 : it->second;
  };
}

Document doc_of(std::vector<TokenSeq> sentences) {
  return Document{"d", std::move(sentences)};
}

}  // namespace

TEST_CASE("noisy-or evaluates the aggregation formula") {
  const Query q{"q", {"t"}};
  CHECK(noisy_or_doc_score(fixed_scorer({{"t", 0.8}}), q, doc_of({{"f"}})) ==
        doctest::Approx(0.8).epsilon(1e-12));

  // two sentences at 0.5
  CHECK(noisy_or_doc_score(fixed_scorer({{"t", 0.5}}), q, doc_of({{"f"}, {"g"}})) ==
        doctest::Approx(0.75).epsilon(1e-12));

  // one certain sentence absorbs everything
  CHECK(noisy_or_doc_score(fixed_scorer({{"t", 1.0}}), q,
                           doc_of({{"f"}, {"g"}, {"h"}})) == 1.0);

  // a two-term query multiplies within each sentence
  const Query q2{"q", {"a", "b"}};
  CHECK(noisy_or_doc_score(fixed_scorer({{"a", 0.5}, {"b", 0.5}}), q2,
                           doc_of({{"f"}})) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("noisy-or rejects scorer outputs outside the unit interval") {
  const Query q{"q", {"t"}};
  CHECK_THROWS_AS(
      noisy_or_doc_score(fixed_scorer({{"t", 1.5}}), q, doc_of({{"f"}})),
      ContractError);
  CHECK_THROWS_AS(
      noisy_or_doc_score(fixed_scorer({{"t", -0.1}}), q, doc_of({{"f"}})),
      ContractError);
}

TEST_CASE("noisy-or matches bernoulli enumeration on random instances") {
  Rng rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n_sent = 1 + static_cast<int>(uniform_below(rng, 10));
    const int n_terms = 1 + static_cast<int>(uniform_below(rng, 3));

    // per-sentence per-term probabilities, looked up by sentence tag
    std::vector<TokenSeq> sentences;
    std::map<std::string, std::vector<double>> probs;
    for (int s = 0; s < n_sent; ++s) {
      const std::string tag = "s" + std::to_string(s);
      sentences.push_back({tag});
      std::vector<double> row;
      for (int t = 0; t < n_terms; ++t) row.push_back(uniform01(rng));
      probs[tag] = row;
    }

    Query query{"q", {}};
    for (int t = 0; t < n_terms; ++t) query.terms.push_back("t" + std::to_string(t));

    const SentenceScorer scorer = [&](const std::string& term,
                                      const TokenSeq& sentence) {
      const int idx = term[1] - '0';
      return probs.at(sentence[0])[static_cast<std::size_t>(idx)];
    };

    // a sentence "fires" when every term matches it
    std::vector<double> fire;
    for (int s = 0; s < n_sent; ++s) {
      double p = 1.0;
      for (double v : probs["s" + std::to_string(s)]) p *= v;
      fire.push_back(p);
    }

    const double got = noisy_or_doc_score(scorer, query, doc_of(sentences));
    CHECK(got == doctest::Approx(oracle::noisy_or_enum(fire)).epsilon(1e-12));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);

    // appending a sentence never decreases the score
    std::vector<TokenSeq> more = sentences;
    more.push_back({"s0"});
    CHECK(noisy_or_doc_score(scorer, query, doc_of(more)) >= got - 1e-15);

    // single-term queries dominate the per-sentence maximum
    if (n_terms == 1) {
      double best = 0.0;
      for (double v : fire) best = std::max(best, v);
      CHECK(got >= best - 1e-15);
    }

    // adding a term never increases the score
    Query extended = query;
    extended.terms.push_back("t0");
    CHECK(noisy_or_doc_score(scorer, extended, doc_of(sentences)) <= got + 1e-12);
  }
}

TEST_CASE("produce_run sorts by score with doc-id tie break") {
  const std::vector<Query> queries{{"q1", {"t"}}};
  const std::vector<Document> docs{
      {"d2", {{"x"}}}, {"d1", {{"x"}}}, {"d3", {{"x"}}}};
  const DocScorer scorer = [](const Query&, const Document& d) {
    if (d.doc_id == "d3") return 0.9;
    return 0.1;  // d1 and d2 tie
  };
  const Run run = produce_run(scorer, queries, docs);
  REQUIRE(run.size() == 1);
  REQUIRE(run[0].entries.size() == 3);
  CHECK(run[0].query_id == "q1");
  CHECK(run[0].entries[0].doc_id == "d3");
  CHECK(run[0].entries[1].doc_id == "d1");
  CHECK(run[0].entries[2].doc_id == "d2");
}

TEST_CASE("produce_run with no queries is empty") {
  const DocScorer scorer = [](const Query&, const Document&) { return 0.5; };
  CHECK(produce_run(scorer, {}, {{"d1", {{"x"}}}}).empty());
}

TEST_CASE("produce_run annotates scorer failures with query and doc") {
  const std::vector<Query> queries{{"q7", {"t"}}};
  const std::vector<Document> docs{{"d9", {{"x"}}}};
  const DocScorer scorer = [](const Query&, const Document&) -> double {
    throw Error("scorer exploded");
  };
  CHECK_THROWS_WITH_AS(produce_run(scorer, queries, docs),
                       doctest::Contains("q7"), Error);
  try {
    produce_run(scorer, queries, docs);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("d9") != std::string::npos);
    CHECK(std::string(e.what()).find("scorer exploded") != std::string::npos);
  }
}

TEST_CASE("minus infinity from the generative scorer ranks last") {
  std::vector<BitextPair> pairs;
  pairs.push_back({0, {"fx"}, {"a"}});
  const BackgroundModel bg = build_background(pairs);
  TranslationTable t;
  t.set("fx", "a", 1.0);

  const std::vector<Query> queries{{"q1", {"a"}}};
  const std::vector<Document> docs{{"d_hit", {{"fx"}}}, {"d_null", {{"zz"}}}};
  const Run run = produce_run(generative_doc_scorer(t, bg, 0.0), queries, docs);
  REQUIRE(run[0].entries.size() == 2);
  CHECK(run[0].entries[0].doc_id == "d_hit");
  CHECK(run[0].entries[1].doc_id == "d_null");
  CHECK(std::isinf(run[0].entries[1].score));
}

TEST_CASE("occurrence scorer factory matches the direct call") {
  TranslationTable t;
  t.set("fx", "a", 0.5);
  const Query q{"q1", {"a"}};
  const Document d{"d1", {{"fx", "fx"}}};
  CHECK(occurrence_doc_scorer(t)(q, d) == occurrence_score(q, d, t));
}

TEST_CASE("run wire format round-trips and keeps rank order") {
  Run run;
  run.push_back({"q1", {{"d1", 1.0 / 3.0}, {"d2", 0.25}}});
  run.push_back({"q2", {{"d9", 1e-17}}});

  TempDir dir("run");
  const std::string path = dir.file("r.tsv");
  save_run(path, run);

  const std::string text = testutil::read_file(path);
  CHECK(text.find("q1\td1\t1\t0.33333333333333331\n") != std::string::npos);
  CHECK(text.find("q1\td2\t2\t0.25\n") != std::string::npos);

  const Run back = load_run(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].query_id == "q1");
  REQUIRE(back[0].entries.size() == 2);
  CHECK(back[0].entries[0].doc_id == "d1");
  CHECK(back[0].entries[0].score == 1.0 / 3.0);
  CHECK(back[1].entries[0].score == 1e-17);
}

TEST_CASE("load_run re-sorts hand-edited files") {
  TempDir dir("run_sort");
  const std::string path = dir.file("r.tsv");
  testutil::write_file(path, "q1\tlow\t1\t0.1\nq1\thigh\t2\t0.9\n");
  const Run run = load_run(path);
  REQUIRE(run.size() == 1);
  CHECK(run[0].entries[0].doc_id == "high");
  CHECK(run[0].entries[1].doc_id == "low");
}
