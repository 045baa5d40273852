#include "clir/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "clir/error.hpp"

namespace clir {

namespace {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// every doc id mentioned anywhere in the run or the judgments
std::set<std::string> doc_universe(const Run& run, const Qrels& qrels) {
  std::set<std::string> docs = qrels.judged_docs;
  for (const auto& [query_id, relevant] : qrels.relevant)
    docs.insert(relevant.begin(), relevant.end());
  for (const RankedList& list : run)
    for (const RunEntry& e : list.entries) docs.insert(e.doc_id);
  return docs;
}

}  // namespace

ClassificationReport classification_report(const std::vector<double>& predictions,
                                           const std::vector<int>& labels,
                                           double threshold) {
  if (predictions.size() != labels.size())
    throw Error("classification report: got " + std::to_string(predictions.size()) +
                " predictions for " + std::to_string(labels.size()) + " labels");
  if (predictions.empty()) throw Error("classification report: no predictions");

  ClassificationReport rep;
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw Error("classification report: labels must be 0 or 1");
    const int predicted = predictions[i] >= threshold ? 1 : 0;
    // row/col 0 is the positive class
    ++rep.counts[labels[i] == 1 ? 0 : 1][predicted == 1 ? 0 : 1];
    if (predicted == labels[i]) ++correct;
  }
  rep.accuracy = static_cast<double>(correct) / static_cast<double>(predictions.size());
  for (int r = 0; r < 2; ++r) {
    const std::int64_t total = rep.counts[r][0] + rep.counts[r][1];
    if (total > 0)
      for (int c = 0; c < 2; ++c)
        rep.rates[r][c] = static_cast<double>(rep.counts[r][c]) / static_cast<double>(total);
  }
  return rep;
}

std::optional<double> average_precision(const std::vector<std::string>& ranked,
                                        const std::set<std::string>& relevant) {
  if (relevant.empty()) return std::nullopt;
  std::unordered_set<std::string> seen;
  double sum = 0.0;
  std::int64_t hits = 0;
  std::int64_t rank = 0;
  for (const std::string& doc_id : ranked) {
    ++rank;
    if (!seen.insert(doc_id).second)
      throw ContractError("average precision: duplicate doc " + doc_id + " in ranking");
    if (relevant.count(doc_id)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

double mean_average_precision(const Run& run, const Qrels& qrels) {
  for (const RankedList& list : run)
    if (qrels.judged_queries.count(list.query_id) == 0 &&
        qrels.relevant.count(list.query_id) == 0)
      throw Error("map: run query " + list.query_id + " has no judgments");

  std::map<std::string, const RankedList*> by_query;
  for (const RankedList& list : run) by_query[list.query_id] = &list;

  double sum = 0.0;
  std::int64_t n = 0;
  for (const auto& [query_id, relevant] : qrels.relevant) {
    if (relevant.empty()) continue;
    std::vector<std::string> ranked;
    if (auto it = by_query.find(query_id); it != by_query.end()) {
      ranked.reserve(it->second->entries.size());
      for (const RunEntry& e : it->second->entries) ranked.push_back(e.doc_id);
    }
    sum += average_precision(ranked, relevant).value();
    ++n;
  }
  if (n == 0) throw Error("map: no query has relevant documents");
  return sum / static_cast<double>(n);
}

double aqwv(const Run& run, const Qrels& qrels, double threshold, double beta) {
  if (!(beta > 0.0)) throw Error("aqwv: beta must be positive");
  const std::set<std::string> docs = doc_universe(run, qrels);
  if (docs.empty()) throw Error("aqwv: no documents to evaluate");
  const double n_docs = static_cast<double>(docs.size());

  std::set<std::string> queries = qrels.judged_queries;
  for (const auto& [query_id, relevant] : qrels.relevant) queries.insert(query_id);
  std::map<std::string, const RankedList*> by_query;
  for (const RankedList& list : run) {
    queries.insert(list.query_id);
    by_query[list.query_id] = &list;
  }

  double miss_sum = 0.0, fa_sum = 0.0;
  std::int64_t miss_n = 0, fa_n = 0;
  for (const std::string& query_id : queries) {
    static const std::set<std::string> kNone;
    auto rel_it = qrels.relevant.find(query_id);
    const std::set<std::string>& relevant =
        rel_it == qrels.relevant.end() ? kNone : rel_it->second;

    std::int64_t returned_relevant = 0, false_alarms = 0;
    if (auto it = by_query.find(query_id); it != by_query.end()) {
      for (const RunEntry& e : it->second->entries) {
        if (e.score < threshold) continue;
        if (relevant.count(e.doc_id)) ++returned_relevant;
        else ++false_alarms;
      }
    }

    const double n_rel = static_cast<double>(relevant.size());
    if (!relevant.empty()) {
      miss_sum += (n_rel - static_cast<double>(returned_relevant)) / n_rel;
      ++miss_n;
      if (n_docs > n_rel) {
        fa_sum += static_cast<double>(false_alarms) / (n_docs - n_rel);
        ++fa_n;
      }
    } else {
      fa_sum += static_cast<double>(false_alarms) / n_docs;
      ++fa_n;
    }
  }

  const double p_miss = miss_n > 0 ? miss_sum / static_cast<double>(miss_n) : 0.0;
  const double p_fa = fa_n > 0 ? fa_sum / static_cast<double>(fa_n) : 0.0;
  return 1.0 - p_miss - beta * p_fa;
}

MqwvResult mqwv(const Run& run, const Qrels& qrels, double beta) {
  std::set<double> candidates;
  double max_score = -std::numeric_limits<double>::infinity();
  for (const RankedList& list : run) {
    for (const RunEntry& e : list.entries) {
      candidates.insert(e.score);
      max_score = std::max(max_score, e.score);
    }
  }
  // one threshold above everything, so "return nothing" is always reachable
  if (candidates.empty())
    candidates.insert(0.0);
  else
    candidates.insert(std::nextafter(max_score, std::numeric_limits<double>::infinity()));

  MqwvResult best;
  bool first = true;
  for (double t : candidates) {  // ascending, so ties land on the larger threshold
    const double v = aqwv(run, qrels, t, beta);
    if (first || v >= best.value) {
      best.value = v;
      best.threshold = t;
      first = false;
    }
  }
  return best;
}

std::string EvalReport::to_text() const {
  std::string out;
  auto put = [&out](const char* key, double v) {
    out += key;
    out += '\t';
    out += format_value(v);
    out += '\n';
  };
  if (map) put("map", *map);
  if (aqwv) put("aqwv", *aqwv);
  if (mqwv) put("mqwv", *mqwv);
  if (threshold) put("threshold", *threshold);
  if (accuracy) put("accuracy", *accuracy);
  if (confusion) {
    for (int r = 0; r < 2; ++r) {
      out += r == 0 ? "confusion.positive" : "confusion.negative";
      out += '\t';
      out += format_value((*confusion)[r][0]);
      out += '\t';
      out += format_value((*confusion)[r][1]);
      out += '\n';
    }
  }
  return out;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  if (map) j["map"] = *map;
  if (aqwv) j["aqwv"] = *aqwv;
  if (mqwv) j["mqwv"] = *mqwv;
  if (threshold) j["threshold"] = *threshold;
  if (accuracy) j["accuracy"] = *accuracy;
  if (confusion)
    j["confusion"] = {{(*confusion)[0][0], (*confusion)[0][1]},
                      {(*confusion)[1][0], (*confusion)[1][1]}};
  return j.dump();
}

}  // namespace clir
