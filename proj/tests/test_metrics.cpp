#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "clir/error.hpp"
#include "clir/metrics.hpp"
#include "clir/rng.hpp"
#include "oracles.hpp"

using namespace clir;

namespace {

// assembles a Run plus Qrels from per-query score maps, every doc scored
struct Instance {
  std::vector<oracle::JudgedQuery> queries;
  std::vector<std::string> docs;

  Run run() const {
    Run r;
    for (std::size_t i = 0; i < queries.size(); ++i) {
      RankedList list;
      list.query_id = "q" + std::to_string(i);
      for (const auto& [doc, score] : queries[i].scores)
        list.entries.push_back({doc, score});
      std::sort(list.entries.begin(), list.entries.end(),
                [](const RunEntry& a, const RunEntry& b) {
                  return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
                });
      r.push_back(std::move(list));
    }
    return r;
  }

  Qrels qrels() const {
    Qrels q;
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const std::string id = "q" + std::to_string(i);
      q.judged_queries.insert(id);
      q.relevant[id] = queries[i].relevant;
      for (const std::string& d : docs) q.judged_docs.insert(d);
    }
    return q;
  }
};

Instance random_instance(Rng& rng, int max_queries, int max_docs) {
  Instance inst;
  const int n_docs = 1 + static_cast<int>(uniform_below(rng, max_docs));
  const int n_queries = 1 + static_cast<int>(uniform_below(rng, max_queries));
  for (int d = 0; d < n_docs; ++d) inst.docs.push_back("d" + std::to_string(d));
  for (int q = 0; q < n_queries; ++q) {
    oracle::JudgedQuery jq;
    for (const std::string& d : inst.docs) {
      // quantized scores force plenty of exact ties
      jq.scores[d] = static_cast<double>(uniform_below(rng, 8)) / 8.0;
      if (uniform_below(rng, 3) == 0) jq.relevant.insert(d);
    }
    inst.queries.push_back(std::move(jq));
  }
  return inst;
}

}  // namespace

TEST_CASE("classification report on fully correct predictions") {
  const ClassificationReport rep =
      classification_report({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0});
  CHECK(rep.accuracy == 1.0);
  CHECK(rep.rates[0][0] == 1.0);
  CHECK(rep.rates[0][1] == 0.0);
  CHECK(rep.rates[1][0] == 0.0);
  CHECK(rep.rates[1][1] == 1.0);
}

TEST_CASE("classification report hand case") {
  const ClassificationReport rep =
      classification_report({0.9, 0.4, 0.6, 0.2}, {1, 1, 0, 0}, 0.5);
  CHECK(rep.accuracy == 0.5);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) CHECK(rep.rates[r][c] == 0.5);
  CHECK(rep.counts[0][0] == 1);
  CHECK(rep.counts[0][1] == 1);
}

TEST_CASE("classification threshold is inclusive and rows normalize per class") {
  const ClassificationReport rep = classification_report({0.5, 0.5}, {1, 0}, 0.5);
  CHECK(rep.counts[0][0] == 1);  // 0.5 >= 0.5 counts as positive
  CHECK(rep.counts[1][0] == 1);
  CHECK(rep.accuracy == 0.5);

  // single-class input leaves the other row as zeros
  const ClassificationReport pos_only = classification_report({0.9, 0.2}, {1, 1});
  CHECK(pos_only.rates[1][0] == 0.0);
  CHECK(pos_only.rates[1][1] == 0.0);
}

TEST_CASE("classification accuracy equals the count-weighted diagonal") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> preds;
    std::vector<int> labels;
    const int n = 1 + static_cast<int>(uniform_below(rng, 20));
    for (int i = 0; i < n; ++i) {
      preds.push_back(uniform01(rng));
      labels.push_back(static_cast<int>(uniform_below(rng, 2)));
    }
    const ClassificationReport rep = classification_report(preds, labels);
    const double diag = static_cast<double>(rep.counts[0][0] + rep.counts[1][1]) / n;
    CHECK(rep.accuracy == doctest::Approx(diag).epsilon(1e-12));
  }
}

TEST_CASE("classification report input validation") {
  CHECK_THROWS_AS(classification_report({0.5}, {1, 0}), Error);
  CHECK_THROWS_AS(classification_report({}, {}), Error);
  CHECK_THROWS_AS(classification_report({0.5}, {2}), Error);
}

TEST_CASE("average precision basics") {
  CHECK(average_precision({"a", "b", "c"}, {"a", "b"}).value() == 1.0);
  CHECK(average_precision({"x", "a", "y"}, {"a"}).value() == 0.5);
  CHECK(average_precision({"x", "y"}, {"a"}).value() == 0.0);
  CHECK_FALSE(average_precision({"x"}, {}).has_value());
  CHECK_THROWS_AS(average_precision({"x", "x"}, {"x"}), ContractError);
}

TEST_CASE("average precision matches the brute-force oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> ranked;
    std::set<std::string> relevant;
    const int n = static_cast<int>(uniform_below(rng, 9));
    for (int i = 0; i < n; ++i) ranked.push_back("d" + std::to_string(i));
    fisher_yates_shuffle(ranked, rng);
    for (int i = 0; i < 8; ++i)
      if (uniform_below(rng, 3) == 0) relevant.insert("d" + std::to_string(i));
    if (relevant.empty()) relevant.insert("d0");

    const double got = average_precision(ranked, relevant).value();
    CHECK(got == oracle::average_precision(ranked, relevant));
  }
}

TEST_CASE("map averages ap over queries with relevant docs") {
  Instance inst;
  inst.docs = {"d0", "d1"};
  // q0: relevant d0 ranked first -> AP 1; q1: relevant d1 ranked second -> 0.5
  inst.queries.push_back({{{"d0", 0.9}, {"d1", 0.1}}, {"d0"}});
  inst.queries.push_back({{{"d0", 0.9}, {"d1", 0.1}}, {"d1"}});
  CHECK(mean_average_precision(inst.run(), inst.qrels()) ==
        doctest::Approx(0.75).epsilon(1e-12));

  // a query with no relevant docs is excluded from the mean
  inst.queries.push_back({{{"d0", 0.5}, {"d1", 0.4}}, {}});
  CHECK(mean_average_precision(inst.run(), inst.qrels()) ==
        doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("map error cases") {
  Instance inst;
  inst.docs = {"d0"};
  inst.queries.push_back({{{"d0", 0.5}}, {}});
  CHECK_THROWS_AS(mean_average_precision(inst.run(), inst.qrels()), Error);

  // a run query absent from the judgments is refused
  Run run = inst.run();
  CHECK_THROWS_AS(mean_average_precision(run, Qrels{}), Error);
}

TEST_CASE("aqwv hand cases reproduce exactly") {
  Instance inst;
  inst.docs = {"d0", "d1", "d2", "d3"};
  // 1 relevant returned, 1 false alarm, 2 quiet docs
  inst.queries.push_back(
      {{{"d0", 0.9}, {"d1", 0.8}, {"d2", 0.1}, {"d3", 0.2}}, {"d0"}});
  const double got = aqwv(inst.run(), inst.qrels(), 0.5, 40.0);
  CHECK(got == doctest::Approx(1.0 - 40.0 / 3.0).epsilon(1e-12));

  // perfect detection
  const double perfect = aqwv(inst.run(), inst.qrels(), 0.85, 40.0);
  CHECK(perfect == doctest::Approx(1.0).epsilon(1e-12));

  // a threshold above every score returns nothing: P_Miss 1, P_FA 0
  const double nothing = aqwv(inst.run(), inst.qrels(), 2.0, 40.0);
  CHECK(nothing == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("aqwv input validation") {
  Instance inst;
  inst.docs = {"d0"};
  inst.queries.push_back({{{"d0", 0.5}}, {"d0"}});
  CHECK_THROWS_AS(aqwv(inst.run(), inst.qrels(), 0.5, 0.0), Error);
  CHECK_THROWS_AS(aqwv(Run{}, Qrels{}, 0.5, 40.0), Error);
}

TEST_CASE("aqwv and mqwv match the exhaustive oracle on random instances") {
  Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const Instance inst = random_instance(rng, 5, 8);
    const Run run = inst.run();
    const Qrels qrels = inst.qrels();
    const int n_docs = static_cast<int>(inst.docs.size());

    const double t = static_cast<double>(uniform_below(rng, 10)) / 8.0;
    CHECK(aqwv(run, qrels, t, 40.0) ==
          oracle::aqwv(inst.queries, n_docs, t, 40.0));

    const MqwvResult got = mqwv(run, qrels, 40.0);
    const oracle::SweepResult want = oracle::mqwv_sweep(inst.queries, n_docs, 40.0);
    CHECK(got.value == want.value);
    CHECK(got.threshold == want.threshold);
    CHECK(got.value >= 0.0);

    // the reported maximum dominates any tried threshold
    CHECK(got.value >= aqwv(run, qrels, t, 40.0) - 1e-15);
    CHECK(got.value <= 1.0 + 1e-15);
  }
}

TEST_CASE("mqwv falls back to returning nothing on adversarial scores") {
  Instance inst;
  inst.docs = {"d0", "d1", "d2"};
  // the sole relevant doc scores below everything, so any returning
  // threshold eats beta-weighted false alarms before its first hit
  inst.queries.push_back({{{"d0", 0.9}, {"d1", 0.5}, {"d2", 0.1}}, {"d2"}});
  const MqwvResult r = mqwv(inst.run(), inst.qrels(), 40.0);
  CHECK(r.value == 0.0);
  CHECK(r.threshold > 0.9);
}

TEST_CASE("mqwv separating scores find the gap threshold") {
  Instance inst;
  inst.docs = {"d0", "d1", "d2"};
  inst.queries.push_back({{{"d0", 0.9}, {"d1", 0.2}, {"d2", 0.1}}, {"d0"}});
  inst.queries.push_back({{{"d0", 0.3}, {"d1", 0.8}, {"d2", 0.05}}, {"d1"}});
  const MqwvResult r = mqwv(inst.run(), inst.qrels(), 40.0);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.threshold > 0.3);
  CHECK(r.threshold <= 0.8);
}

TEST_CASE("metrics are pure functions") {
  Rng rng(7);
  const Instance inst = random_instance(rng, 4, 6);
  const Run run = inst.run();
  const Qrels qrels = inst.qrels();
  const double a1 = aqwv(run, qrels, 0.5, 40.0);
  const double a2 = aqwv(run, qrels, 0.5, 40.0);
  CHECK(a1 == a2);
  const MqwvResult m1 = mqwv(run, qrels, 40.0);
  const MqwvResult m2 = mqwv(run, qrels, 40.0);
  CHECK(m1.value == m2.value);
  CHECK(m1.threshold == m2.threshold);
}

TEST_CASE("eval report renders only present fields") {
  EvalReport rep;
  rep.map = 0.75;
  rep.mqwv = 0.5;
  const std::string text = rep.to_text();
  CHECK(text.find("map\t0.75") != std::string::npos);
  CHECK(text.find("mqwv\t0.5") != std::string::npos);
  CHECK(text.find("aqwv") == std::string::npos);
  CHECK(text.find("accuracy") == std::string::npos);

  rep.confusion = {{{0.93, 0.07}, {0.02, 0.98}}};
  const std::string json = rep.to_json();
  CHECK(json.find("\"map\":0.75") != std::string::npos);
  CHECK(json.find("\"confusion\":[[0.93,0.07],[0.02,0.98]]") != std::string::npos);
  CHECK(json.find("aqwv") == std::string::npos);
}
