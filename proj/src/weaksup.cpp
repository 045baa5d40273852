#include "clir/weaksup.hpp"

#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "clir/error.hpp"
#include "clir/rng.hpp"

namespace clir {

std::vector<TrainingSample> build_samples(const std::vector<BitextPair>& pairs,
                                          const Vocabulary& vocab,
                                          std::int64_t neg_per_pos,
                                          std::uint64_t seed) {
  if (neg_per_pos < 0) throw Error("neg_per_pos must be >= 0");
  const std::vector<std::int64_t> candidate_ids = vocab.non_stopword_ids();

  Rng rng(seed);
  std::vector<TrainingSample> samples;
  std::vector<std::int64_t> absent;
  for (const auto& pair : pairs) {
    std::unordered_set<std::string> present(pair.english.begin(), pair.english.end());

    // Positive queries: distinct non-stopword types in first-occurrence order.
    std::vector<std::string> positives;
    std::unordered_set<std::string> emitted;
    for (const auto& token : pair.english) {
      if (!emitted.insert(token).second) continue;
      if (vocab.is_stopword(token) || !vocab.contains(token)) continue;
      positives.push_back(token);
    }
    if (positives.empty()) continue;

    absent.clear();
    for (const std::int64_t id : candidate_ids)
      if (present.count(vocab.entry(id).token) == 0) absent.push_back(id);
    if (neg_per_pos > static_cast<std::int64_t>(absent.size()))
      throw Error("pair " + std::to_string(pair.pair_id) + ": only " +
                  std::to_string(absent.size()) +
                  " eligible negative tokens, need " + std::to_string(neg_per_pos));

    for (const auto& query : positives) {
      samples.push_back({query, pair.foreign, 1, pair.pair_id});
      // Partial Fisher-Yates draw: without replacement within this positive.
      for (std::int64_t k = 0; k < neg_per_pos; ++k) {
        const std::size_t limit = absent.size() - static_cast<std::size_t>(k);
        const std::size_t j = static_cast<std::size_t>(uniform_below(rng, limit));
        std::swap(absent[j], absent[limit - 1]);
        samples.push_back(
            {vocab.entry(absent[limit - 1]).token, pair.foreign, 0, pair.pair_id});
      }
    }
  }
  return samples;
}

SampleSplit split_samples(const std::vector<TrainingSample>& samples,
                          double dev_fraction, std::uint64_t seed) {
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0))
    throw Error("dev_fraction must be in [0, 1)");
  SampleSplit split;
  for (const auto& s : samples) {
    const std::uint64_t h =
        splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(s.pair_id));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    (u < dev_fraction ? split.dev : split.train).push_back(s);
  }
  return split;
}

void save_samples(const std::vector<TrainingSample>& samples,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto& s : samples) {
    nlohmann::ordered_json j;
    j["q"] = s.query;
    j["s"] = s.sentence;
    j["label"] = s.label;
    j["pair_id"] = s.pair_id;
    out << j.dump() << '\n';
  }
}

std::vector<TrainingSample> load_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::vector<TrainingSample> samples;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TrainingSample s;
      s.query = j.at("q").get<std::string>();
      s.sentence = j.at("s").get<TokenSeq>();
      s.label = j.at("label").get<int>();
      s.pair_id = j.at("pair_id").get<std::int64_t>();
      if (s.label != 0 && s.label != 1)
        throw Error("label must be 0 or 1");
      samples.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return samples;
}

}  // namespace clir
