#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clir/corpus.hpp"

namespace clir {

// One proxy-task example: an English query term paired with a foreign
// sentence and a binary relevance label. pair_id records the originating
// bitext pair, so labels stay auditable against the corpus.
struct TrainingSample {
  std::string query;
  TokenSeq sentence;
  int label = 0;  // 1 = query occurs in the pair's English side
  std::int64_t pair_id = 0;

  bool operator==(const TrainingSample&) const = default;
};

// For each pair: one positive per distinct non-stopword English token type
// present in vocab (first-occurrence order), each followed by `neg_per_pos`
// negatives drawn uniformly without replacement from the non-stopword
// vocabulary tokens absent from that pair's English side. Fully determined by
// (pairs, vocab, neg_per_pos, seed). Throws Error naming the pair_id when a
// pair's absent-token pool is smaller than neg_per_pos.
std::vector<TrainingSample> build_samples(const std::vector<BitextPair>& pairs,
                                          const Vocabulary& vocab,
                                          std::int64_t neg_per_pos,
                                          std::uint64_t seed);

struct SampleSplit {
  std::vector<TrainingSample> train;
  std::vector<TrainingSample> dev;
};

// Splits by pair_id via a seeded hash so all samples from one bitext land on
// the same side. dev_fraction must be in [0, 1).
SampleSplit split_samples(const std::vector<TrainingSample>& samples,
                          double dev_fraction, std::uint64_t seed);

// Wire format: one JSON object per line,
// {"q": "<token>", "s": ["<tok>", ...], "label": 0|1, "pair_id": <int>}.
void save_samples(const std::vector<TrainingSample>& samples,
                  const std::string& path);
std::vector<TrainingSample> load_samples(const std::string& path);

}  // namespace clir
