#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "clir/corpus.hpp"
#include "clir/error.hpp"
#include "clir/weaksup.hpp"
#include "testutil.hpp"

using namespace clir;
using testutil::TempDir;

namespace {

// the Lithuanian bitext plus filler pairs so the vocabulary also contains
// words absent from it (negative-query material)
std::vector<BitextPair> fixture_pairs() {
  std::vector<BitextPair> pairs;
  pairs.push_back(
      {0,
       {"medikų", "teigimu", "dabar", "veikianti", "sistema", "efektyvi"},
       {"doctors", "allege", "that", "the", "system", "currently", "in",
        "operation", "is", "effective"}});
  pairs.push_back({1, {"valdiklis", "laisvalaikis"}, {"controller", "leisure"}});
  return pairs;
}

Vocabulary fixture_vocab(const std::vector<BitextPair>& pairs) {
  return Vocabulary::build(english_sides(pairs), builtin_stopwords());
}

std::set<std::string> english_types(const BitextPair& pair) {
  return {pair.english.begin(), pair.english.end()};
}

}  // namespace

TEST_CASE("positives cover distinct non-stop english types, negatives're absent words") {
  const auto pairs = fixture_pairs();
  const Vocabulary vocab = fixture_vocab(pairs);
  const auto samples = build_samples(pairs, vocab, 1, 5);

  std::set<std::string> positive_queries;
  for (const TrainingSample& s : samples) {
    const BitextPair& origin = pairs[static_cast<std::size_t>(s.pair_id)];
    CHECK(s.sentence == origin.foreign);
    const bool in_english = english_types(origin).count(s.query) > 0;
    CHECK(s.label == (in_english ? 1 : 0));
    CHECK_FALSE(vocab.is_stopword(s.query));
    if (s.label == 1 && s.pair_id == 0) positive_queries.insert(s.query);
  }

  // the illustrative pair yields these positive queries and no stopword ones
  const std::set<std::string> want{"doctors",   "allege",    "system",
                                   "currently", "operation", "effective"};
  CHECK(positive_queries == want);

  // "controller" and "leisure" can only ever be negatives for pair 0
  for (const TrainingSample& s : samples)
    if (s.pair_id == 0 && (s.query == "controller" || s.query == "leisure"))
      CHECK(s.label == 0);
}

TEST_CASE("neg_per_pos 0 yields positives only") {
  const auto pairs = fixture_pairs();
  const auto samples = build_samples(pairs, fixture_vocab(pairs), 0, 5);
  CHECK_FALSE(samples.empty());
  for (const TrainingSample& s : samples) CHECK(s.label == 1);
}

TEST_CASE("a pair with 2 types and neg_per_pos 2 emits 2 positives and 4 negatives") {
  std::vector<BitextPair> pairs;
  pairs.push_back({0, {"fa", "fb"}, {"alpha", "beta"}});
  // filler so 2 absent words exist to draw from
  pairs.push_back({1, {"fc", "fd"}, {"gamma", "delta"}});
  const Vocabulary vocab = fixture_vocab(pairs);

  std::int64_t pos = 0, neg = 0;
  for (const TrainingSample& s : build_samples(pairs, vocab, 2, 9))
    if (s.pair_id == 0) (s.label == 1 ? pos : neg) += 1;
  CHECK(pos == 2);
  CHECK(neg == 4);
}

TEST_CASE("stream ratio is exactly 1:neg_per_pos and repeated words count once") {
  std::vector<BitextPair> pairs;
  pairs.push_back({0, {"fa", "fa", "fb"}, {"alpha", "alpha", "beta"}});
  pairs.push_back({1, {"fc"}, {"gamma", "delta", "epsilon"}});
  pairs.push_back({2, {"fd"}, {"zeta", "eta", "theta"}});
  const Vocabulary vocab = fixture_vocab(pairs);

  for (std::int64_t k : {1, 2, 3}) {
    const auto samples = build_samples(pairs, vocab, k, 11);
    const auto positives =
        std::count_if(samples.begin(), samples.end(),
                      [](const TrainingSample& s) { return s.label == 1; });
    const auto negatives = static_cast<std::int64_t>(samples.size()) - positives;
    CHECK(negatives == k * positives);
    // "alpha" occurring twice still contributes a single positive
    CHECK(positives == 8);
  }
}

TEST_CASE("negatives are drawn without replacement within one positive") {
  // vocabulary wider than the corpus so a 4-negative draw has a pool to use
  std::vector<VocabEntry> entries;
  for (const char* w : {"alpha", "beta", "gamma", "delta", "epsilon", "zeta"})
    entries.push_back({w, 1, false});
  const Vocabulary vocab = Vocabulary::from_entries(entries);

  std::vector<BitextPair> pairs;
  pairs.push_back({0, {"fa"}, {"alpha"}});

  const auto samples = build_samples(pairs, vocab, 4, 3);
  std::vector<std::string> negs;
  for (const TrainingSample& s : samples)
    if (s.pair_id == 0 && s.label == 0) negs.push_back(s.query);
  REQUIRE(negs.size() == 4);
  std::sort(negs.begin(), negs.end());
  CHECK(std::adjacent_find(negs.begin(), negs.end()) == negs.end());
}

TEST_CASE("pool exhaustion raises an error naming the pair") {
  std::vector<BitextPair> pairs;
  pairs.push_back({0, {"fa"}, {"alpha"}});
  pairs.push_back({7, {"fb"}, {"beta"}});
  const Vocabulary vocab = fixture_vocab(pairs);
  // each pair sees only 1 absent non-stop word, so 2 negatives cannot be drawn
  CHECK_THROWS_WITH_AS(build_samples(pairs, vocab, 2, 1), doctest::Contains("0"),
                       Error);
}

TEST_CASE("generation is deterministic in all inputs") {
  const auto pairs = fixture_pairs();
  const Vocabulary vocab = fixture_vocab(pairs);
  const auto a = build_samples(pairs, vocab, 2, 42);
  const auto b = build_samples(pairs, vocab, 2, 42);
  CHECK(a == b);
  const auto c = build_samples(pairs, vocab, 2, 43);
  CHECK(a != c);  // astronomically unlikely to collide
}

TEST_CASE("split keeps all samples of a pair on one side") {
  std::vector<BitextPair> pairs;
  for (std::int64_t i = 0; i < 100; ++i) {
    const std::string f = "f" + std::to_string(i);
    const std::string e = "e" + std::to_string(i);
    pairs.push_back({i, {f, "fx"}, {e, "shared"}});
  }
  const Vocabulary vocab = fixture_vocab(pairs);
  const auto samples = build_samples(pairs, vocab, 1, 2);

  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const SampleSplit split = split_samples(samples, 0.2, seed);
    CHECK(split.train.size() + split.dev.size() == samples.size());
    std::set<std::int64_t> train_pairs, dev_pairs;
    for (const TrainingSample& s : split.train) train_pairs.insert(s.pair_id);
    for (const TrainingSample& s : split.dev) dev_pairs.insert(s.pair_id);
    for (std::int64_t id : dev_pairs) CHECK(train_pairs.count(id) == 0);

    // about a fifth of the 100 pair ids should land in dev
    CHECK(dev_pairs.size() > 5);
    CHECK(dev_pairs.size() < 40);
  }
}

TEST_CASE("dev_fraction 0 places everything in train") {
  const auto pairs = fixture_pairs();
  const auto samples = build_samples(pairs, fixture_vocab(pairs), 2, 1);
  const SampleSplit split = split_samples(samples, 0.0, 9);
  CHECK(split.dev.empty());
  CHECK(split.train.size() == samples.size());
}

TEST_CASE("split rejects a dev fraction outside [0, 1)") {
  const auto pairs = fixture_pairs();
  const auto samples = build_samples(pairs, fixture_vocab(pairs), 1, 1);
  CHECK_THROWS_AS(split_samples(samples, 1.0, 0), Error);
  CHECK_THROWS_AS(split_samples(samples, -0.1, 0), Error);
}

TEST_CASE("samples wire format round-trips") {
  const auto pairs = fixture_pairs();
  const auto samples = build_samples(pairs, fixture_vocab(pairs), 2, 17);

  TempDir dir("samples");
  const std::string path = dir.file("s.jsonl");
  save_samples(samples, path);
  const auto loaded = load_samples(path);
  CHECK(loaded == samples);

  // spot-check the shape of one line
  const std::string text = testutil::read_file(path);
  CHECK(text.find("\"q\"") != std::string::npos);
  CHECK(text.find("\"s\"") != std::string::npos);
  CHECK(text.find("\"label\"") != std::string::npos);
  CHECK(text.find("\"pair_id\"") != std::string::npos);
}
