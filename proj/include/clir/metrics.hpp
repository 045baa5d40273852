#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "clir/corpus.hpp"
#include "clir/ranker.hpp"

namespace clir {

// 2x2 confusion over {positive, negative} true classes; row index is the
// true class with positive first, column index the predicted class. `rates`
// holds the row-normalized counts (a row of zeros when its class is empty).
struct ClassificationReport {
  double accuracy = 0.0;
  std::array<std::array<std::int64_t, 2>, 2> counts{{{0, 0}, {0, 0}}};
  std::array<std::array<double, 2>, 2> rates{{{0.0, 0.0}, {0.0, 0.0}}};
};

ClassificationReport classification_report(const std::vector<double>& predictions,
                                           const std::vector<int>& labels,
                                           double threshold = 0.5);

// Mean over all relevant docs of precision at the rank where each was
// retrieved; relevant docs missing from the ranking contribute 0. Empty
// relevant set has no defined value.
std::optional<double> average_precision(const std::vector<std::string>& ranked,
                                        const std::set<std::string>& relevant);

// Unweighted mean of average_precision over queries with at least one
// relevant doc. Every run query must be judged in the qrels.
double mean_average_precision(const Run& run, const Qrels& qrels);

// 1 - mean P_Miss - beta * mean P_FA at a fixed threshold; a doc counts as
// returned when its score >= threshold. Each mean runs over the queries
// where its quantity is defined, and an empty mean contributes 0.
double aqwv(const Run& run, const Qrels& qrels, double threshold, double beta);

struct MqwvResult {
  double threshold = 0.0;
  double value = 0.0;
};

// Best aqwv over one global threshold. Candidates are the distinct run
// scores plus one value above the maximum; value ties resolve toward the
// larger threshold.
MqwvResult mqwv(const Run& run, const Qrels& qrels, double beta);

// Assembled evaluation output. Absent fields are omitted from both the
// key<TAB>value text form and the JSON form.
struct EvalReport {
  std::optional<double> map;
  std::optional<double> aqwv;
  std::optional<double> mqwv;
  std::optional<double> threshold;
  std::optional<double> accuracy;
  std::optional<std::array<std::array<double, 2>, 2>> confusion;

  std::string to_text() const;
  std::string to_json() const;
};

}  // namespace clir
